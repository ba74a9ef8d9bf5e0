//! Name similarity and mention detection.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::api_db::ApiDatabase;
use crate::text::{jaccard, name_token_sequence, Sentence, ThreadDoc};

/// Post id used for mentions found in the thread title.
pub const TITLE_POST_ID: &str = "#title";

/// Prefix matches need at least this many characters on the shorter side.
pub const MIN_PREFIX_CHARS: usize = 4;

pub const DEFAULT_MIN_TOKEN_SORT: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MatchKind {
    Exact,
    Prefix,
    TokenSort,
    None,
}

/// Preprocessed name: ordered tokens, token set and character count.
#[derive(Debug, Clone)]
pub struct NameTokens {
    pub sequence: Vec<String>,
    pub set: BTreeSet<String>,
    chars: usize,
}

impl NameTokens {
    pub fn new(name: &str) -> Self {
        Self::from_sequence(name_token_sequence(name))
    }

    fn from_sequence(sequence: Vec<String>) -> Self {
        let chars = sequence.iter().map(|t| t.chars().count()).sum();
        let set = sequence.iter().cloned().collect();
        NameTokens {
            sequence,
            set,
            chars,
        }
    }
}

pub fn name_similarity(mention: &str, name: &str) -> (MatchKind, f64) {
    similarity_of(&NameTokens::new(mention), &NameTokens::new(name))
}

pub fn similarity_of(m: &NameTokens, c: &NameTokens) -> (MatchKind, f64) {
    if m.sequence.is_empty() || c.sequence.is_empty() {
        return (MatchKind::None, 0.0);
    }
    if m.sequence == c.sequence {
        return (MatchKind::Exact, 1.0);
    }
    let (short, long) = if m.sequence.len() <= c.sequence.len() {
        (m, c)
    } else {
        (c, m)
    };
    if short.sequence.len() < long.sequence.len()
        && long.sequence.starts_with(&short.sequence)
        && short.chars >= MIN_PREFIX_CHARS
    {
        return (MatchKind::Prefix, 1.0);
    }
    let w = jaccard(&m.set, &c.set);
    if w > 0.0 {
        (MatchKind::TokenSort, w)
    } else {
        (MatchKind::None, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Mention {
    pub thread_id: String,
    /// [`TITLE_POST_ID`] for title mentions.
    pub post_id: String,
    pub sentence_index: usize,
    pub start: usize,
    pub end: usize,
    pub surface: String,
}

impl Mention {
    pub fn in_title(&self) -> bool {
        self.post_id == TITLE_POST_ID
    }

    pub fn same_span(&self, other: &Mention) -> bool {
        self.thread_id == other.thread_id
            && self.post_id == other.post_id
            && self.sentence_index == other.sentence_index
            && self.start == other.start
            && self.end == other.end
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub api_id: String,
    pub matched_module: Option<String>,
    pub match_kind: MatchKind,
    pub name_sim: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MentionCandidateList {
    pub mention: Mention,
    pub candidates: Vec<Candidate>,
}

impl MentionCandidateList {
    pub fn candidate(&self, api_id: &str) -> Option<&Candidate> {
        self.candidates.iter().find(|c| c.api_id == api_id)
    }
}

struct IndexedName {
    api: usize,
    module: Option<usize>,
    tokens: NameTokens,
}

/// Every API and module name of a database, tokenized once, with an
/// inverted token index.
pub struct NameIndex {
    names: Vec<IndexedName>,
    by_token: HashMap<String, Vec<usize>>,
    max_len: usize,
}

impl NameIndex {
    pub fn build(db: &ApiDatabase) -> Self {
        let mut names = Vec::new();
        for (api, e) in db.entries().iter().enumerate() {
            names.push(IndexedName {
                api,
                module: None,
                tokens: NameTokens::new(&e.name),
            });
            for (mi, m) in e.modules.iter().enumerate() {
                names.push(IndexedName {
                    api,
                    module: Some(mi),
                    tokens: NameTokens::new(&m.name),
                });
            }
        }
        let mut by_token: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            for t in &n.tokens.set {
                by_token.entry(t.clone()).or_default().push(i);
            }
        }
        let max_len = names
            .iter()
            .map(|n| n.tokens.sequence.len())
            .max()
            .unwrap_or(0);
        NameIndex {
            names,
            by_token,
            max_len,
        }
    }

    pub fn in_vocabulary(&self, token: &str) -> bool {
        self.by_token.contains_key(token)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectConfig {
    pub min_token_sort: f64,
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            min_token_sort: DEFAULT_MIN_TOKEN_SORT,
        }
    }
}

pub fn detect_mentions(
    doc: &ThreadDoc,
    db: &ApiDatabase,
    index: &NameIndex,
    config: &DetectConfig,
) -> Vec<MentionCandidateList> {
    let mut out = Vec::new();
    scan_sentence(
        doc,
        TITLE_POST_ID,
        0,
        &doc.title,
        db,
        index,
        config,
        &mut out,
    );
    for post in &doc.posts {
        for (si, s) in post.sentences.iter().enumerate() {
            scan_sentence(doc, &post.post_id, si, s, db, index, config, &mut out);
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn scan_sentence(
    doc: &ThreadDoc,
    post_id: &str,
    sentence_index: usize,
    sentence: &Sentence,
    db: &ApiDatabase,
    index: &NameIndex,
    config: &DetectConfig,
    out: &mut Vec<MentionCandidateList>,
) {
    // name tokens per sentence token, None when the token cannot be part of a mention
    let eligible: Vec<Option<Vec<String>>> = sentence
        .tokens
        .iter()
        .map(|t| {
            if !t.is_word() {
                return None;
            }
            let seq = name_token_sequence(&t.surface);
            (!seq.is_empty() && seq.iter().all(|s| index.in_vocabulary(s))).then_some(seq)
        })
        .collect();

    let n = sentence.tokens.len();
    let mut i = 0;
    while i < n {
        let max_span = index.max_len.min(n - i);
        let mut matched = None;
        for len in (1..=max_span).rev() {
            let span = &eligible[i..i + len];
            if span.iter().any(Option::is_none) {
                continue;
            }
            let seq: Vec<String> = span.iter().flatten().flatten().cloned().collect();
            let tokens = NameTokens::from_sequence(seq);
            let candidates = candidates_for(&tokens, len > 1, db, index, config);
            if !candidates.is_empty() {
                matched = Some((len, candidates));
                break;
            }
        }
        match matched {
            Some((len, candidates)) => {
                let surface = sentence.tokens[i..i + len]
                    .iter()
                    .map(|t| t.surface.as_str())
                    .collect::<Vec<_>>()
                    .join(" ");
                out.push(MentionCandidateList {
                    mention: Mention {
                        thread_id: doc.thread_id.clone(),
                        post_id: post_id.to_string(),
                        sentence_index,
                        start: i,
                        end: i + len,
                        surface,
                    },
                    candidates,
                });
                i += len;
            }
            None => i += 1,
        }
    }
}

/// Matches a token span against the index. Multi-token spans only qualify
/// when some name contains every span token; once qualified, every name
/// that matches contributes.
fn candidates_for(
    span: &NameTokens,
    multi: bool,
    db: &ApiDatabase,
    index: &NameIndex,
    config: &DetectConfig,
) -> Vec<Candidate> {
    let mut hits: BTreeSet<usize> = BTreeSet::new();
    for t in &span.set {
        if let Some(ids) = index.by_token.get(t) {
            hits.extend(ids.iter().copied());
        }
    }
    if multi
        && !hits
            .iter()
            .any(|&h| span.set.is_subset(&index.names[h].tokens.set))
    {
        return Vec::new();
    }

    // best match per API: higher weight, then API name over module, then module order
    let mut best: BTreeMap<&str, (f64, Option<usize>, MatchKind)> = BTreeMap::new();
    for h in hits {
        let name = &index.names[h];
        let (kind, w) = similarity_of(span, &name.tokens);
        if kind == MatchKind::None || (kind == MatchKind::TokenSort && w < config.min_token_sort) {
            continue;
        }
        let api_id = db.entries()[name.api].id.as_str();
        let better = match best.get(api_id) {
            None => true,
            Some(&(bw, bm, _)) => w > bw || (w == bw && module_rank(name.module) < module_rank(bm)),
        };
        if better {
            best.insert(api_id, (w, name.module, kind));
        }
    }
    best.into_iter()
        .map(|(api_id, (w, module, kind))| Candidate {
            api_id: api_id.to_string(),
            matched_module: module.map(|mi| db.get(api_id).unwrap().modules[mi].name.clone()),
            match_kind: kind,
            name_sim: w,
        })
        .collect()
}

fn module_rank(m: Option<usize>) -> usize {
    m.map_or(0, |i| i + 1)
}
