//! End-to-end resolution of a thread: detection, features, classification,
//! intrinsic filtering, then a second pass of extrinsic filtering.

mod config;
mod render;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use config::PipelineConfig;
pub use render::{
    parse_records, render_html, render_records, to_records, DecisionRecord, RECORDS_VERSION,
};

use crate::api_db::{api_homepage, module_homepage, ApiDatabase};
use crate::classifier::{CorpusRecord, FeatureVector, Label, NBModel, TrainingExample};
use crate::code::{
    extract_code_context, link_types, parse_post_snippets, structural_similarity, CodeConfig,
    CodeContext,
};
use crate::context::{build_feature_context, context_similarity, DescriptionCache, FeatureContext};
use crate::detect::{
    detect_mentions, Candidate, DetectConfig, Mention, MentionCandidateList, NameIndex,
};
use crate::filters::{
    extrinsic_filter, intrinsic_filter, ExtrinsicConfig, FilterName, Hit, PostMention,
};
use crate::text::{name_token_sequence, ThreadDoc};
use crate::{Error, Result};

/// Which stage produced a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Provenance {
    /// No candidate cleared the confidence threshold.
    ClassifierNoHit,
    ClassifierSingleHit,
    Intrinsic(FilterName),
    Extrinsic(FilterName),
    Fallback,
}

type Scored = Vec<(Candidate, FeatureVector)>;

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::ClassifierNoHit => f.write_str("CLASSIFIER_NO_HIT"),
            Provenance::ClassifierSingleHit => f.write_str("CLASSIFIER_SINGLE_HIT"),
            Provenance::Intrinsic(n) => write!(f, "INTRINSIC:{n}"),
            Provenance::Extrinsic(n) => write!(f, "EXTRINSIC:{n}"),
            Provenance::Fallback => f.write_str("FALLBACK"),
        }
    }
}

impl std::str::FromStr for Provenance {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let filter = |name: &str| {
            Ok(match name {
                "betweenness" => FilterName::Betweenness,
                "centrality" => FilterName::Centrality,
                "closeness" => FilterName::Closeness,
                "composition" => FilterName::Composition,
                "aggregation" => FilterName::Aggregation,
                "projection" => FilterName::Projection,
                other => return Err(format!("unknown filter `{other}`")),
            })
        };
        match s {
            "CLASSIFIER_NO_HIT" => Ok(Provenance::ClassifierNoHit),
            "CLASSIFIER_SINGLE_HIT" => Ok(Provenance::ClassifierSingleHit),
            "FALLBACK" => Ok(Provenance::Fallback),
            _ => match s.split_once(':') {
                Some(("INTRINSIC", n)) => filter(n).map(Provenance::Intrinsic),
                Some(("EXTRINSIC", n)) => filter(n).map(Provenance::Extrinsic),
                _ => Err(format!("unknown provenance `{s}`")),
            },
        }
    }
}

impl Serialize for Provenance {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Provenance {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    FalseMention,
    Api {
        api_id: String,
        module: Option<String>,
        url: Option<String>,
    },
}

impl Outcome {
    pub fn api_id(&self) -> Option<&str> {
        match self {
            Outcome::FalseMention => None,
            Outcome::Api { api_id, .. } => Some(api_id),
        }
    }

    pub fn label(&self) -> Label {
        Label::from_bool(self.api_id().is_some())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionDecision {
    pub mention: Mention,
    pub outcome: Outcome,
    pub provenance: Provenance,
    /// Confidence of the chosen candidate; for false mentions the best
    /// confidence seen.
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredCandidate {
    pub candidate: Candidate,
    pub features: FeatureVector,
    pub confidence: f64,
}

/// Everything computed for one mention, kept for tracing.
#[derive(Debug, Clone, PartialEq)]
pub struct MentionAnalysis {
    pub mcl: MentionCandidateList,
    pub context: FeatureContext,
    pub code: CodeContext,
    pub scored: Vec<ScoredCandidate>,
    pub hits: Vec<Hit>,
    pub first_pass: ResolutionDecision,
    pub decision: ResolutionDecision,
}

/// Detection and feature computation against one database; needs no model.
pub struct Featurizer<'a> {
    db: &'a ApiDatabase,
    config: PipelineConfig,
    index: NameIndex,
    descriptions: DescriptionCache,
}

type Featurized = (FeatureContext, CodeContext, Vec<(Candidate, FeatureVector)>);

impl<'a> Featurizer<'a> {
    pub fn new(db: &'a ApiDatabase, config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        Ok(Featurizer {
            db,
            config,
            index: NameIndex::build(db),
            descriptions: DescriptionCache::build(db),
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn db(&self) -> &ApiDatabase {
        self.db
    }

    pub fn detect(&self, doc: &ThreadDoc) -> Vec<MentionCandidateList> {
        let config = DetectConfig {
            min_token_sort: self.config.min_token_sort,
        };
        detect_mentions(doc, self.db, &self.index, &config)
    }

    /// Feature vectors for every candidate of every detected mention.
    pub fn featurize(
        &self,
        doc: &ThreadDoc,
        mcls: &[MentionCandidateList],
    ) -> Result<Vec<Featurized>> {
        let mentions: Vec<Mention> = mcls.iter().map(|m| m.mention.clone()).collect();
        let code_config = CodeConfig {
            filter_java_lang: self.config.filter_java_lang,
        };
        let code = extract_code_context(doc, &mentions, &code_config);
        let snippets: BTreeMap<&str, _> = doc
            .posts
            .iter()
            .map(|p| (p.post_id.as_str(), parse_post_snippets(p)))
            .collect();
        let mut out = Vec::with_capacity(mcls.len());
        for (mcl, code_ctx) in mcls.iter().zip(code) {
            let ctx = build_feature_context(&mcl.mention, doc, self.config.window);
            let post_snippets = snippets
                .get(mcl.mention.post_id.as_str())
                .map_or(&[][..], |v| &v[..]);
            let links = link_types(&code_ctx, &mcl.candidates, post_snippets, self.db);
            let mut features = Vec::with_capacity(mcl.candidates.len());
            for c in &mcl.candidates {
                let entry = self.db.entry(&c.api_id)?;
                let desc = self.descriptions.get(&c.api_id).ok_or_else(|| {
                    Error::Invariant(format!("no description for `{}`", c.api_id))
                })?;
                let (noun, verb) = context_similarity(&ctx, desc);
                let structural = structural_similarity(&code_ctx, &c.api_id, &links);
                let fv = FeatureVector::new(
                    c.name_sim,
                    noun,
                    verb,
                    structural,
                    entry.usage_count,
                    entry.download_count,
                );
                features.push((c.clone(), fv));
            }
            out.push((ctx, code_ctx, features));
        }
        Ok(out)
    }

    /// Training examples for a labeled corpus; mention references are
    /// featurized against the given threads.
    pub fn training_examples(
        &self,
        corpus: &[CorpusRecord],
        threads: &BTreeMap<String, ThreadDoc>,
    ) -> Result<Vec<TrainingExample>> {
        let mut cache: BTreeMap<&str, (Vec<MentionCandidateList>, Vec<Scored>)> = BTreeMap::new();
        let mut out = Vec::with_capacity(corpus.len());
        for (n, rec) in corpus.iter().enumerate() {
            let r = match rec {
                CorpusRecord::Features { features, label } => {
                    out.push(TrainingExample {
                        features: *features,
                        label: *label,
                    });
                    continue;
                }
                CorpusRecord::Mention(r) => r,
            };
            let doc = threads.get(&r.thread_id).ok_or_else(|| {
                Error::Training(format!(
                    "record {}: unknown thread `{}`",
                    n + 1,
                    r.thread_id
                ))
            })?;
            if !cache.contains_key(r.thread_id.as_str()) {
                let mcls = self.detect(doc);
                let feats = self
                    .featurize(doc, &mcls)?
                    .into_iter()
                    .map(|(_, _, f)| f)
                    .collect();
                cache.insert(&r.thread_id, (mcls, feats));
            }
            let (mcls, feats) = &cache[r.thread_id.as_str()];
            let pos = mcls
                .iter()
                .position(|m| {
                    m.mention.post_id == r.post_id
                        && m.mention.sentence_index == r.sentence_index
                        && m.mention.start == r.start
                        && m.mention.end == r.end
                })
                .ok_or_else(|| {
                    Error::Training(format!(
                        "record {}: no mention detected at {}/{}/{}[{}..{}]",
                        n + 1,
                        r.thread_id,
                        r.post_id,
                        r.sentence_index,
                        r.start,
                        r.end
                    ))
                })?;
            let (_, fv) = feats[pos]
                .iter()
                .find(|(c, _)| c.api_id == r.api_id)
                .ok_or_else(|| {
                    Error::Training(format!(
                        "record {}: `{}` is not a candidate of `{}`",
                        n + 1,
                        r.api_id,
                        mcls[pos].mention.surface
                    ))
                })?;
            out.push(TrainingExample {
                features: *fv,
                label: r.label,
            });
        }
        Ok(out)
    }
}

/// Immutable state shared by every thread resolved against one database
/// and model.
pub struct Resolver<'a> {
    f: Featurizer<'a>,
    model: &'a NBModel,
}

impl<'a> Resolver<'a> {
    pub fn new(db: &'a ApiDatabase, model: &'a NBModel, config: PipelineConfig) -> Result<Self> {
        Ok(Resolver {
            f: Featurizer::new(db, config)?,
            model,
        })
    }

    pub fn featurizer(&self) -> &Featurizer<'a> {
        &self.f
    }

    /// Both passes, with every intermediate value.
    pub fn analyze_thread(&self, doc: &ThreadDoc) -> Result<Vec<MentionAnalysis>> {
        let mcls = self.f.detect(doc);
        let featurized = self.f.featurize(doc, &mcls)?;
        let mut analyses = Vec::with_capacity(mcls.len());
        for (mcl, (ctx, code, features)) in mcls.into_iter().zip(featurized) {
            let scored: Vec<ScoredCandidate> = features
                .into_iter()
                .map(|(candidate, features)| ScoredCandidate {
                    confidence: self.model.confidence(&features),
                    candidate,
                    features,
                })
                .collect();
            let hits: Vec<Hit> = scored
                .iter()
                .filter(|s| s.confidence > self.f.config.tau)
                .map(|s| Hit {
                    candidate: s.candidate.clone(),
                    confidence: s.confidence,
                })
                .collect();
            let first_pass = self.first_pass(&mcl, &ctx, &scored, &hits)?;
            analyses.push(MentionAnalysis {
                decision: first_pass.clone(),
                mcl,
                context: ctx,
                code,
                scored,
                hits,
                first_pass,
            });
        }
        self.second_pass(doc, &mut analyses)?;
        Ok(analyses)
    }

    pub fn resolve_thread(&self, doc: &ThreadDoc) -> Result<Vec<ResolutionDecision>> {
        Ok(self
            .analyze_thread(doc)?
            .into_iter()
            .map(|a| a.decision)
            .collect())
    }

    fn first_pass(
        &self,
        mcl: &MentionCandidateList,
        ctx: &FeatureContext,
        scored: &[ScoredCandidate],
        hits: &[Hit],
    ) -> Result<ResolutionDecision> {
        let mention = mcl.mention.clone();
        match hits {
            [] => Ok(ResolutionDecision {
                mention,
                outcome: Outcome::FalseMention,
                provenance: Provenance::ClassifierNoHit,
                confidence: scored.iter().map(|s| s.confidence).fold(0.0, f64::max),
            }),
            [only] => Ok(ResolutionDecision {
                outcome: self.assign(&mention, &only.candidate.api_id, None)?,
                mention,
                provenance: Provenance::ClassifierSingleHit,
                confidence: only.confidence,
            }),
            _ => {
                let d = intrinsic_filter(hits, mcl, ctx, self.f.db.graph()).ok_or_else(|| {
                    Error::Invariant("filter abstained on a non-empty hit list".into())
                })?;
                let provenance = d.filter.map_or(Provenance::Fallback, Provenance::Intrinsic);
                Ok(ResolutionDecision {
                    outcome: self.assign(&mention, &d.chosen.api_id, None)?,
                    mention,
                    provenance,
                    confidence: hit_confidence(hits, &d.chosen.api_id)?,
                })
            }
        }
    }

    fn second_pass(&self, doc: &ThreadDoc, analyses: &mut [MentionAnalysis]) -> Result<()> {
        let mut by_post: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, a) in analyses.iter().enumerate() {
            by_post
                .entry(a.mcl.mention.post_id.as_str())
                .or_default()
                .push(i);
        }
        let extrinsic = ExtrinsicConfig {
            relax_gate: self.f.config.relax_extrinsic_gate,
        };
        let mut updates = Vec::new();
        for (post_id, mut idx) in by_post {
            idx.sort_by_key(|&i| {
                (
                    analyses[i].mcl.mention.sentence_index,
                    analyses[i].mcl.mention.start,
                )
            });
            let offsets = sentence_offsets(doc, post_id);
            let post_mentions: Vec<PostMention> = idx
                .iter()
                .map(|&i| {
                    let a = &analyses[i];
                    let m = &a.mcl.mention;
                    let base = offsets.get(m.sentence_index).copied().unwrap_or(0);
                    PostMention {
                        surface: &m.surface,
                        start: base + m.start,
                        end: base + m.end,
                        hits: &a.hits,
                        resolved: a.first_pass.outcome.api_id(),
                    }
                })
                .collect();
            for (k, d) in extrinsic_filter(&post_mentions, self.f.db, &extrinsic)
                .into_iter()
                .enumerate()
            {
                if let Some(d) = d {
                    updates.push((idx[k], d));
                }
            }
        }
        for (i, d) in updates {
            let a = &mut analyses[i];
            let filter = d
                .filter
                .ok_or_else(|| Error::Invariant("extrinsic decision without a filter".into()))?;
            a.decision = ResolutionDecision {
                mention: a.mcl.mention.clone(),
                outcome: self.assign(&a.mcl.mention, &d.chosen.api_id, d.module)?,
                provenance: Provenance::Extrinsic(filter),
                confidence: hit_confidence(&a.hits, &d.chosen.api_id)?,
            };
        }
        Ok(())
    }

    /// Module scan and URL for a chosen API. `module` overrides the scan.
    fn assign(&self, mention: &Mention, api_id: &str, module: Option<String>) -> Result<Outcome> {
        let entry = self.f.db.entry(api_id)?;
        let module = module.or_else(|| {
            let wanted = name_token_sequence(&mention.surface);
            entry
                .modules
                .iter()
                .find(|m| name_token_sequence(&m.name) == wanted)
                .map(|m| m.name.clone())
        });
        let url = match &module {
            Some(m) => module_homepage(entry, m),
            None => api_homepage(entry),
        };
        let url = match url {
            Ok(u) => Some(u),
            Err(Error::NoHomepage(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(Outcome::Api {
            api_id: api_id.to_string(),
            module,
            url,
        })
    }
}

fn hit_confidence(hits: &[Hit], api_id: &str) -> Result<f64> {
    hits.iter()
        .find(|h| h.api_id() == api_id)
        .map(|h| h.confidence)
        .ok_or_else(|| Error::Invariant(format!("filter chose `{api_id}` outside the hit list")))
}

/// Token offset of each sentence's first token within its post.
fn sentence_offsets(doc: &ThreadDoc, post_id: &str) -> Vec<usize> {
    let sentences = match doc.post(post_id) {
        Some((_, p)) => &p.sentences[..],
        None => std::slice::from_ref(&doc.title),
    };
    let mut acc = 0;
    sentences
        .iter()
        .map(|s| {
            let here = acc;
            acc += s.len();
            here
        })
        .collect()
}

/// Serializable summary of a [`MentionAnalysis`], one per mention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MentionTrace {
    pub post_id: String,
    pub sentence_index: usize,
    pub start: usize,
    pub end: usize,
    pub surface: String,
    pub code_types: Vec<String>,
    pub candidates: Vec<CandidateTrace>,
    pub hits: Vec<String>,
    pub first_pass: Option<String>,
    pub first_provenance: Provenance,
    pub api_id: Option<String>,
    pub module: Option<String>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateTrace {
    pub api_id: String,
    pub features: FeatureVector,
    pub confidence: f64,
}

impl MentionAnalysis {
    pub fn trace(&self) -> MentionTrace {
        let m = &self.mcl.mention;
        let module = match &self.decision.outcome {
            Outcome::Api { module, .. } => module.clone(),
            Outcome::FalseMention => None,
        };
        MentionTrace {
            post_id: m.post_id.clone(),
            sentence_index: m.sentence_index,
            start: m.start,
            end: m.end,
            surface: m.surface.clone(),
            code_types: self.code.types.iter().cloned().collect(),
            candidates: self
                .scored
                .iter()
                .map(|s| CandidateTrace {
                    api_id: s.candidate.api_id.clone(),
                    features: s.features,
                    confidence: s.confidence,
                })
                .collect(),
            hits: self.hits.iter().map(|h| h.api_id().to_string()).collect(),
            first_pass: self.first_pass.outcome.api_id().map(str::to_string),
            first_provenance: self.first_pass.provenance,
            api_id: self.decision.outcome.api_id().map(str::to_string),
            module,
            provenance: self.decision.provenance,
        }
    }
}
