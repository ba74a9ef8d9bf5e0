//! Disambiguation of mentions with several hits, first from the dependency
//! structure of the candidate list, then from resolved neighbor mentions.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::api_db::{ApiDatabase, DependencyGraph};
use crate::context::FeatureContext;
use crate::detect::{Candidate, MentionCandidateList};
use crate::text::tokenize_name;

pub const BETWEENNESS_KEYWORDS: [&str; 10] = [
    "extension",
    "extensions",
    "extended",
    "wrapper",
    "wrappers",
    "wrapping",
    "plugin",
    "plugins",
    "plug-in",
    "plug-ins",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Hit {
    pub candidate: Candidate,
    pub confidence: f64,
}

impl Hit {
    pub fn api_id(&self) -> &str {
        &self.candidate.api_id
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterName {
    Betweenness,
    Centrality,
    Closeness,
    Composition,
    Aggregation,
    Projection,
}

impl FilterName {
    pub fn as_str(self) -> &'static str {
        match self {
            FilterName::Betweenness => "betweenness",
            FilterName::Centrality => "centrality",
            FilterName::Closeness => "closeness",
            FilterName::Composition => "composition",
            FilterName::Aggregation => "aggregation",
            FilterName::Projection => "projection",
        }
    }
}

impl fmt::Display for FilterName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of filtering one hit list. `filter` is `None` for the
/// highest-confidence fallback.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterDecision {
    pub chosen: Candidate,
    pub filter: Option<FilterName>,
    /// Module recorded by composition.
    pub module: Option<String>,
    pub overwrote_intrinsic: bool,
}

/// Direct dependents of `hit` among the other candidates of the list.
pub fn mcl_dependents(hit: &str, mcl: &MentionCandidateList, graph: &DependencyGraph) -> usize {
    mcl.candidates
        .iter()
        .filter(|c| c.api_id != hit && graph.has_edge(&c.api_id, hit))
        .count()
}

/// Candidates of the list that `hit` depends on directly.
pub fn mcl_dependees(hit: &str, mcl: &MentionCandidateList, graph: &DependencyGraph) -> usize {
    mcl.candidates
        .iter()
        .filter(|c| c.api_id != hit && graph.has_edge(hit, &c.api_id))
        .count()
}

pub fn influence_score(hit: &str, mcl: &MentionCandidateList, graph: &DependencyGraph) -> f64 {
    mcl_dependents(hit, mcl, graph) as f64 / (mcl_dependees(hit, mcl, graph) as f64 + 1.0)
}

pub fn closeness_score(hit: &str, mcl: &MentionCandidateList, graph: &DependencyGraph) -> f64 {
    1.0 / (mcl_dependents(hit, mcl, graph) as f64 + 1.0)
}

pub fn has_betweenness_keyword(ctx: &FeatureContext) -> bool {
    BETWEENNESS_KEYWORDS.iter().any(|k| ctx.contains(k))
}

/// Picks the hit that directly extends another hit, when the context talks
/// about extensions, wrappers or plugins.
pub fn betweenness_filter<'h>(
    hits: &'h [Hit],
    ctx: &FeatureContext,
    graph: &DependencyGraph,
) -> Option<&'h Hit> {
    if !has_betweenness_keyword(ctx) {
        return None;
    }
    let bucket: Vec<&Hit> = hits
        .iter()
        .filter(|h1| {
            hits.iter()
                .any(|h2| h2.api_id() != h1.api_id() && graph.has_edge(h1.api_id(), h2.api_id()))
        })
        .collect();
    bucket.into_iter().min_by(|a, b| {
        b.candidate
            .name_sim
            .total_cmp(&a.candidate.name_sim)
            .then_with(|| a.api_id().cmp(b.api_id()))
    })
}

/// Unique highest influence, ties broken by most dependents.
pub fn centrality_filter<'h>(
    hits: &'h [Hit],
    mcl: &MentionCandidateList,
    graph: &DependencyGraph,
) -> Option<&'h Hit> {
    let scored: Vec<(f64, usize, &Hit)> = hits
        .iter()
        .map(|h| {
            (
                influence_score(h.api_id(), mcl, graph),
                mcl_dependents(h.api_id(), mcl, graph),
                h,
            )
        })
        .collect();
    let best = scored.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    let top: Vec<_> = scored.iter().filter(|s| s.0 == best).collect();
    let most = top.iter().map(|s| s.1).max()?;
    let top: Vec<_> = top.into_iter().filter(|s| s.1 == most).collect();
    match top.as_slice() {
        [only] => Some(only.2),
        _ => None,
    }
}

/// Unique lowest closeness among hits depended on by some other candidate.
pub fn closeness_filter<'h>(
    hits: &'h [Hit],
    mcl: &MentionCandidateList,
    graph: &DependencyGraph,
) -> Option<&'h Hit> {
    let scored: Vec<(f64, &Hit)> = hits
        .iter()
        .filter(|h| mcl_dependents(h.api_id(), mcl, graph) >= 1)
        .map(|h| (closeness_score(h.api_id(), mcl, graph), h))
        .collect();
    let low = scored.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let top: Vec<_> = scored.iter().filter(|s| s.0 == low).collect();
    match top.as_slice() {
        [only] => Some(only.1),
        _ => None,
    }
}

/// Highest confidence, then smaller api id.
pub fn fallback(hits: &[Hit]) -> Option<&Hit> {
    hits.iter().min_by(|a, b| {
        b.confidence
            .total_cmp(&a.confidence)
            .then_with(|| a.api_id().cmp(b.api_id()))
    })
}

/// Betweenness, centrality, closeness in order; the first to decide wins,
/// else the highest-confidence hit. `None` only for an empty hit list.
pub fn intrinsic_filter(
    hits: &[Hit],
    mcl: &MentionCandidateList,
    ctx: &FeatureContext,
    graph: &DependencyGraph,
) -> Option<FilterDecision> {
    let decided = |h: &Hit, f: Option<FilterName>| FilterDecision {
        chosen: h.candidate.clone(),
        filter: f,
        module: None,
        overwrote_intrinsic: false,
    };
    if let Some(h) = betweenness_filter(hits, ctx, graph) {
        return Some(decided(h, Some(FilterName::Betweenness)));
    }
    if let Some(h) = centrality_filter(hits, mcl, graph) {
        return Some(decided(h, Some(FilterName::Centrality)));
    }
    if let Some(h) = closeness_filter(hits, mcl, graph) {
        return Some(decided(h, Some(FilterName::Closeness)));
    }
    fallback(hits).map(|h| decided(h, None))
}

/// One mention of a post as seen by the extrinsic filters. Offsets count
/// tokens across the whole post.
#[derive(Debug, Clone)]
pub struct PostMention<'a> {
    pub surface: &'a str,
    pub start: usize,
    pub end: usize,
    pub hits: &'a [Hit],
    /// Pass-one resolution, if the mention was resolved as a true API.
    pub resolved: Option<&'a str>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExtrinsicConfig {
    /// Accept a single resolved neighbor on either side.
    pub relax_gate: bool,
}

fn distance(a: &PostMention, b: &PostMention) -> usize {
    if b.end <= a.start {
        a.start - b.end
    } else {
        b.start.saturating_sub(a.end)
    }
}

/// Composition, aggregation, projection for every multi-hit mention of a
/// post, given in document order. Neighbors are the pass-one resolutions.
pub fn extrinsic_filter(
    mentions: &[PostMention],
    db: &ApiDatabase,
    config: &ExtrinsicConfig,
) -> Vec<Option<FilterDecision>> {
    let graph = db.graph();
    (0..mentions.len())
        .map(|i| {
            let m = &mentions[i];
            if m.hits.len() < 2 {
                return None;
            }
            let prev = mentions[..i].iter().rev().find(|n| n.resolved.is_some());
            let next = mentions[i + 1..].iter().find(|n| n.resolved.is_some());
            let gate = if config.relax_gate {
                prev.is_some() || next.is_some()
            } else {
                prev.is_some() && next.is_some()
            };
            if !gate {
                return None;
            }
            let decide = |h: &Hit, f: FilterName, module: Option<String>| FilterDecision {
                chosen: h.candidate.clone(),
                filter: Some(f),
                module,
                overwrote_intrinsic: true,
            };

            if let Some(p) = prev.and_then(|n| n.resolved) {
                if let Some(h) = m.hits.iter().find(|h| h.api_id() == p) {
                    let tokens = tokenize_name(m.surface);
                    let entry = db.get(p).expect("resolved ids come from the database");
                    let module = entry
                        .modules
                        .iter()
                        .find(|md| !tokenize_name(&md.name).is_disjoint(&tokens));
                    if let Some(md) = module {
                        return Some(decide(h, FilterName::Composition, Some(md.name.clone())));
                    }
                }
            }

            let nearest = match (prev, next) {
                (Some(p), Some(n)) if distance(m, n) < distance(m, p) => n,
                (Some(p), _) => p,
                (None, Some(n)) => n,
                (None, None) => unreachable!("gate requires a neighbor"),
            };
            let anchor = nearest.resolved.unwrap();
            let depended: Vec<&Hit> = m
                .hits
                .iter()
                .filter(|h| h.api_id() != anchor && graph.has_edge(anchor, h.api_id()))
                .collect();
            if let [h] = depended.as_slice() {
                return Some(decide(h, FilterName::Aggregation, None));
            }

            let around: BTreeSet<&str> = prev
                .iter()
                .chain(next.iter())
                .filter_map(|n| n.resolved)
                .collect();
            let dependent: Vec<&Hit> = m
                .hits
                .iter()
                .filter(|h| {
                    around
                        .iter()
                        .any(|a| *a != h.api_id() && graph.has_edge(h.api_id(), a))
                })
                .collect();
            if let [h] = dependent.as_slice() {
                return Some(decide(h, FilterName::Projection, None));
            }
            None
        })
        .collect()
}
