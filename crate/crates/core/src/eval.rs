//! Span-level precision, recall and F1 of decision records against
//! hand-labeled truth, for detection and for resolution.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifier::Label;
use crate::pipeline::DecisionRecord;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruthRecord {
    pub thread_id: String,
    pub post_id: String,
    pub sentence_index: usize,
    pub start: usize,
    pub end: usize,
    /// `None` marks a false mention.
    pub api: Option<String>,
    #[serde(default)]
    pub module: Option<String>,
}

pub fn parse_truth(text: &str, context: &str) -> Result<Vec<GroundTruthRecord>> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let r: GroundTruthRecord =
            serde_json::from_str(line).map_err(|e| Error::parse(context, i + 1, e))?;
        if r.start >= r.end {
            return Err(Error::parse(context, i + 1, "empty span"));
        }
        if r.api.is_none() && r.module.is_some() {
            return Err(Error::parse(
                context,
                i + 1,
                "module given for a false mention",
            ));
        }
        let key = (
            r.thread_id.clone(),
            r.post_id.clone(),
            r.sentence_index,
            r.start,
            r.end,
        );
        if !seen.insert(key) {
            return Err(Error::parse(context, i + 1, "duplicate span"));
        }
        out.push(r);
    }
    Ok(out)
}

pub fn load_truth(path: &Path) -> Result<Vec<GroundTruthRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_truth(&text, &path.display().to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Counts {
    fn add(&mut self, o: Counts) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }

    /// Precision is 1 with no predictions and recall is 1 with nothing to
    /// find, so identical inputs always score perfectly.
    pub fn metrics(&self) -> Metrics {
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                1.0
            } else {
                num as f64 / den as f64
            }
        };
        let precision = ratio(self.tp, self.tp + self.fp);
        let recall = ratio(self.tp, self.tp + self.fn_);
        let f1 = if precision == 0.0 || recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Metrics {
            tp: self.tp,
            fp: self.fp,
            fn_: self.fn_,
            precision,
            recall,
            f1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreadReport {
    /// `None` for the aggregate line.
    pub thread_id: Option<String>,
    pub detection: Metrics,
    pub resolution: Metrics,
    /// Correct API, different module.
    pub module_mismatches: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub threads: Vec<ThreadReport>,
    pub aggregate: ThreadReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalConfig {
    /// Match spans that overlap instead of requiring equality.
    pub overlap: bool,
}

type SpanKey<'a> = (&'a str, usize, usize, usize);

fn spans_match(a: SpanKey, b: SpanKey, overlap: bool) -> bool {
    if overlap {
        a.0 == b.0 && a.1 == b.1 && a.2 < b.3 && b.2 < a.3
    } else {
        a == b
    }
}

#[derive(Default)]
struct ThreadTally {
    detection: Counts,
    resolution: Counts,
    module_mismatches: usize,
}

fn tally(
    predicted: &[&DecisionRecord],
    truth: &[&GroundTruthRecord],
    config: &EvalConfig,
) -> ThreadTally {
    let pred: Vec<&DecisionRecord> = predicted
        .iter()
        .copied()
        .filter(|r| r.outcome == Label::TrueApi)
        .collect();
    let gold: Vec<&GroundTruthRecord> = truth.iter().copied().filter(|r| r.api.is_some()).collect();
    let mut used = vec![false; gold.len()];
    let mut t = ThreadTally::default();
    for p in &pred {
        let pk = (p.post_id.as_str(), p.sentence_index, p.start, p.end);
        let found = gold.iter().enumerate().position(|(i, g)| {
            !used[i]
                && spans_match(
                    pk,
                    (g.post_id.as_str(), g.sentence_index, g.start, g.end),
                    config.overlap,
                )
        });
        match found {
            Some(i) => {
                used[i] = true;
                t.detection.tp += 1;
                if p.api_id == gold[i].api {
                    t.resolution.tp += 1;
                    if p.module != gold[i].module {
                        t.module_mismatches += 1;
                    }
                } else {
                    t.resolution.fp += 1;
                    t.resolution.fn_ += 1;
                }
            }
            None => {
                t.detection.fp += 1;
                t.resolution.fp += 1;
            }
        }
    }
    let missed = used.iter().filter(|u| !**u).count();
    t.detection.fn_ += missed;
    t.resolution.fn_ += missed;
    t
}

/// Per-thread and micro-averaged scores. Every thread named by a decision
/// must appear in the truth.
pub fn evaluate(
    decisions: &[DecisionRecord],
    truth: &[GroundTruthRecord],
    config: &EvalConfig,
) -> Result<EvalReport> {
    let mut gold: BTreeMap<&str, Vec<&GroundTruthRecord>> = BTreeMap::new();
    for g in truth {
        gold.entry(&g.thread_id).or_default().push(g);
    }
    let mut pred: BTreeMap<&str, Vec<&DecisionRecord>> = BTreeMap::new();
    for d in decisions {
        if !gold.contains_key(d.thread_id.as_str()) {
            return Err(Error::Evaluation(format!(
                "decision refers to thread `{}`, which has no ground truth",
                d.thread_id
            )));
        }
        pred.entry(&d.thread_id).or_default().push(d);
    }
    let mut threads = Vec::new();
    let mut det = Counts::default();
    let mut res = Counts::default();
    let mut mismatches = 0;
    for (thread, g) in &gold {
        let p = pred.get(thread).map_or(&[][..], |v| &v[..]);
        let t = tally(p, g, config);
        det.add(t.detection);
        res.add(t.resolution);
        mismatches += t.module_mismatches;
        threads.push(ThreadReport {
            thread_id: Some(thread.to_string()),
            detection: t.detection.metrics(),
            resolution: t.resolution.metrics(),
            module_mismatches: t.module_mismatches,
        });
    }
    Ok(EvalReport {
        threads,
        aggregate: ThreadReport {
            thread_id: None,
            detection: det.metrics(),
            resolution: res.metrics(),
            module_mismatches: mismatches,
        },
    })
}

impl EvalReport {
    /// One JSON object per thread, then the aggregate.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for t in self.threads.iter().chain(std::iter::once(&self.aggregate)) {
            out.push_str(&serde_json::to_string(t).expect("report serializes"));
            out.push('\n');
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<24} {:>6} {:>6} {:>6}   {:>6} {:>6} {:>6}   {:>6}",
            "thread", "det.P", "det.R", "det.F1", "res.P", "res.R", "res.F1", "module"
        );
        for t in self.threads.iter().chain(std::iter::once(&self.aggregate)) {
            let name = t.thread_id.as_deref().unwrap_or("(all)");
            let _ = writeln!(
                out,
                "{:<24} {:>6.3} {:>6.3} {:>6.3}   {:>6.3} {:>6.3} {:>6.3}   {:>6}",
                name,
                t.detection.precision,
                t.detection.recall,
                t.detection.f1,
                t.resolution.precision,
                t.resolution.recall,
                t.resolution.f1,
                t.module_mismatches
            );
        }
        out
    }
}
