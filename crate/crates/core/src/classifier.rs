//! Gaussian Naive Bayes over six mention/candidate features.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MODEL_VERSION: u32 = 1;
pub const NUM_FEATURES: usize = 6;
pub const FEATURE_NAMES: [&str; NUM_FEATURES] = [
    "name_sim",
    "noun_sim",
    "verb_sim",
    "struct_sim",
    "log_usage",
    "log_download",
];
/// Lower bound on per-class feature variance.
pub const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Label {
    TrueApi,
    FalseMention,
}

impl Label {
    pub fn from_bool(is_api: bool) -> Self {
        if is_api {
            Label::TrueApi
        } else {
            Label::FalseMention
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureVector {
    pub name_sim: f64,
    pub noun_sim: f64,
    pub verb_sim: f64,
    pub struct_sim: f64,
    pub log_usage: f64,
    pub log_download: f64,
}

impl FeatureVector {
    pub fn new(
        name_sim: f64,
        noun_sim: f64,
        verb_sim: f64,
        struct_sim: f64,
        usage_count: u64,
        download_count: u64,
    ) -> Self {
        FeatureVector {
            name_sim,
            noun_sim,
            verb_sim,
            struct_sim,
            log_usage: (usage_count as f64).ln_1p(),
            log_download: (download_count as f64).ln_1p(),
        }
    }

    pub fn from_array(v: [f64; NUM_FEATURES]) -> Self {
        FeatureVector {
            name_sim: v[0],
            noun_sim: v[1],
            verb_sim: v[2],
            struct_sim: v[3],
            log_usage: v[4],
            log_download: v[5],
        }
    }

    pub fn to_array(&self) -> [f64; NUM_FEATURES] {
        [
            self.name_sim,
            self.noun_sim,
            self.verb_sim,
            self.struct_sim,
            self.log_usage,
            self.log_download,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub features: FeatureVector,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassStats {
    pub label: Label,
    pub count: usize,
    pub prior: f64,
    pub means: [f64; NUM_FEATURES],
    pub variances: [f64; NUM_FEATURES],
}

impl ClassStats {
    /// ln P(c) + sum of Gaussian log densities.
    pub fn log_joint(&self, x: &FeatureVector) -> f64 {
        let x = x.to_array();
        let mut total = self.prior.ln();
        for ((xi, mean), var) in x.iter().zip(&self.means).zip(&self.variances) {
            let d = xi - mean;
            total += -0.5 * (2.0 * PI * var).ln() - d * d / (2.0 * var);
        }
        total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NBModel {
    pub version: u32,
    pub feature_names: Vec<String>,
    pub variance_floor: f64,
    pub true_api: ClassStats,
    pub false_mention: ClassStats,
}

fn class_stats(label: Label, rows: &[[f64; NUM_FEATURES]], total: usize) -> ClassStats {
    let n = rows.len() as f64;
    let mut means = [0.0; NUM_FEATURES];
    let mut variances = [0.0; NUM_FEATURES];
    for i in 0..NUM_FEATURES {
        means[i] = rows.iter().map(|r| r[i]).sum::<f64>() / n;
        let ss: f64 = rows.iter().map(|r| (r[i] - means[i]).powi(2)).sum();
        variances[i] = (ss / n).max(VARIANCE_FLOOR);
    }
    ClassStats {
        label,
        count: rows.len(),
        prior: n / total as f64,
        means,
        variances,
    }
}

/// Maximum-likelihood fit: label-frequency priors, per-class means and
/// population variances (floored).
pub fn train(examples: &[TrainingExample]) -> Result<NBModel> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (i, ex) in examples.iter().enumerate() {
        if !ex.features.is_finite() {
            return Err(Error::Training(format!(
                "example {i} has a non-finite feature"
            )));
        }
        match ex.label {
            Label::TrueApi => pos.push(ex.features.to_array()),
            Label::FalseMention => neg.push(ex.features.to_array()),
        }
    }
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Training(format!(
            "both labels are required (TRUE_API: {}, FALSE_MENTION: {})",
            pos.len(),
            neg.len()
        )));
    }
    Ok(NBModel {
        version: MODEL_VERSION,
        feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        variance_floor: VARIANCE_FLOOR,
        true_api: class_stats(Label::TrueApi, &pos, examples.len()),
        false_mention: class_stats(Label::FalseMention, &neg, examples.len()),
    })
}

impl NBModel {
    /// Posterior probability of TRUE_API.
    pub fn confidence(&self, x: &FeatureVector) -> f64 {
        let lt = self.true_api.log_joint(x);
        let lf = self.false_mention.log_joint(x);
        // logistic of the log-odds, arranged to avoid overflow
        let d = lf - lt;
        if d > 0.0 {
            let e = (-d).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + d.exp())
        }
    }

    pub fn predict(&self, x: &FeatureVector, tau: f64) -> Label {
        Label::from_bool(self.confidence(x) >= tau)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: NBModel = serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        if self.version != MODEL_VERSION {
            return Err(Error::Model(format!(
                "unsupported version {} (expected {MODEL_VERSION})",
                self.version
            )));
        }
        if self.feature_names != FEATURE_NAMES {
            return Err(Error::Model(format!(
                "feature names {:?} do not match {:?}",
                self.feature_names, FEATURE_NAMES
            )));
        }
        for (stats, label) in [
            (&self.true_api, Label::TrueApi),
            (&self.false_mention, Label::FalseMention),
        ] {
            if stats.label != label {
                return Err(Error::Model("class labels out of place".into()));
            }
            if !(stats.prior > 0.0 && stats.prior < 1.0) {
                return Err(Error::Model(format!(
                    "prior {} outside (0, 1)",
                    stats.prior
                )));
            }
            if stats.means.iter().any(|m| !m.is_finite())
                || stats.variances.iter().any(|v| !(v.is_finite() && *v > 0.0))
            {
                return Err(Error::Model(
                    "non-finite mean or non-positive variance".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = self.to_json();
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// A line of a training corpus: either precomputed features, or a reference
/// to a detected mention/candidate pair that still needs featurizing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CorpusRecord {
    Features {
        features: FeatureVector,
        label: Label,
    },
    Mention(MentionLabel),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MentionLabel {
    pub thread_id: String,
    pub post_id: String,
    pub sentence_index: usize,
    pub start: usize,
    pub end: usize,
    pub api_id: String,
    pub label: Label,
}

pub fn parse_corpus(text: &str, context: &str) -> Result<Vec<CorpusRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let rec: CorpusRecord =
            serde_json::from_str(line).map_err(|e| Error::parse(context, i + 1, e))?;
        out.push(rec);
    }
    Ok(out)
}

/// Two well-separated Gaussian classes, reproducible from `seed`.
pub fn synthetic_examples(n: usize, seed: u64) -> Vec<TrainingExample> {
    let true_means = [0.8, 0.55, 0.45, 0.6, 7.0, 9.0];
    let false_means = [0.35, 0.15, 0.1, 0.05, 4.0, 6.0];
    let sds = [0.12, 0.15, 0.15, 0.2, 1.5, 1.5];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let is_api = rng.gen_bool(0.5);
            let means = if is_api { &true_means } else { &false_means };
            let mut v = [0.0; NUM_FEATURES];
            for i in 0..NUM_FEATURES {
                v[i] = Normal::new(means[i], sds[i]).unwrap().sample(&mut rng);
            }
            TrainingExample {
                features: FeatureVector::from_array(v),
                label: Label::from_bool(is_api),
            }
        })
        .collect()
}
