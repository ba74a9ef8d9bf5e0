//! Feature contexts around mentions and selected candidate descriptions,
//! compared by noun and verb overlap.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::api_db::{ApiDatabase, ApiEntry};
use crate::detect::{similarity_of, MatchKind, Mention, NameTokens};
use crate::error::{Error, Result};
use crate::text::{
    is_stopword, jaccard, name_token_sequence, split_text, Pos, Sentence, ThreadDoc,
};

pub const DEFAULT_WINDOW: usize = 3;

/// Sentence-initial pronouns that may refer back to the API.
pub const SUBJECT_PRONOUNS: [&str; 2] = ["it", "they"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Source {
    SamePost,
    OtherPost,
    Title,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextToken {
    pub token: String,
    pub pos: Pos,
    pub source: Source,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureContext {
    pub tokens: Vec<ContextToken>,
}

impl FeatureContext {
    fn with_pos(&self, pos: Pos) -> BTreeSet<String> {
        self.tokens
            .iter()
            .filter(|t| t.pos == pos)
            .map(|t| t.token.clone())
            .collect()
    }

    pub fn nouns(&self) -> BTreeSet<String> {
        self.with_pos(Pos::Noun)
    }

    pub fn verbs(&self) -> BTreeSet<String> {
        self.with_pos(Pos::Verb)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.tokens.iter().any(|t| t.token == token)
    }

    fn push_sentence(&mut self, s: &Sentence, skip: Option<(usize, usize)>, source: Source) {
        for (i, t) in s.tokens.iter().enumerate() {
            if skip.is_some_and(|(a, b)| i >= a && i < b) {
                continue;
            }
            if !t.is_word() || is_stopword(&t.normalized) {
                continue;
            }
            self.tokens.push(ContextToken {
                token: t.normalized.clone(),
                pos: t.pos,
                source,
            });
        }
    }

    fn push_window(
        &mut self,
        sentences: &[Sentence],
        center: usize,
        window: usize,
        skip: (usize, usize),
        source: Source,
    ) {
        let lo = center.saturating_sub(window);
        let hi = (center + window).min(sentences.len().saturating_sub(1));
        for (si, s) in sentences.iter().enumerate().take(hi + 1).skip(lo) {
            let own = (si == center).then_some(skip);
            self.push_sentence(s, own, source);
        }
    }
}

fn normalized_key(s: &Sentence, start: usize, end: usize) -> Vec<&str> {
    s.tokens[start..end]
        .iter()
        .map(|t| t.normalized.as_str())
        .collect()
}

/// Window sentences around the mention, the windows around the same surface
/// in other posts, and the title. The mention's own tokens and stopwords are
/// left out.
pub fn build_feature_context(mention: &Mention, doc: &ThreadDoc, window: usize) -> FeatureContext {
    let mut ctx = FeatureContext::default();
    let own_span = (mention.start, mention.end);
    let key = mention.surface.to_lowercase();
    let key: Vec<String> = crate::text::tokenize_sentence(&key)
        .tokens
        .into_iter()
        .map(|t| t.normalized)
        .collect();
    let key: Vec<&str> = key.iter().map(String::as_str).collect();

    let home = doc.post(&mention.post_id).map(|(i, _)| i);
    if let Some(pi) = home {
        ctx.push_window(
            &doc.posts[pi].sentences,
            mention.sentence_index,
            window,
            own_span,
            Source::SamePost,
        );
    }

    for (qi, post) in doc.posts.iter().enumerate() {
        if Some(qi) == home {
            continue;
        }
        for (si, s) in post.sentences.iter().enumerate() {
            let n = key.len();
            if n == 0 || s.tokens.len() < n {
                continue;
            }
            for start in 0..=s.tokens.len() - n {
                if normalized_key(s, start, start + n) == key {
                    ctx.push_window(
                        &post.sentences,
                        si,
                        window,
                        (start, start + n),
                        Source::OtherPost,
                    );
                }
            }
        }
    }

    let title_skip = mention.in_title().then_some(own_span);
    ctx.push_sentence(&doc.title, title_skip, Source::Title);
    ctx
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateDescription {
    pub api_id: String,
    pub selected_sentences: Vec<Sentence>,
    pub noun_set: BTreeSet<String>,
    pub verb_set: BTreeSet<String>,
}

/// Which selection rule admitted a description sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionRule {
    StartsWithName,
    PronounFollowingName,
    ReferencesOtherApi,
}

fn link_key(url: &str) -> String {
    let lower = url.to_ascii_lowercase();
    let rest = lower.split_once("://").map_or(lower.as_str(), |(_, r)| r);
    let rest = rest.strip_prefix("www.").unwrap_or(rest);
    rest.trim_end_matches('/').to_string()
}

struct Selector {
    names: Vec<BTreeSet<String>>,
    foreign_links: Vec<String>,
    dependency_names: Vec<NameTokens>,
}

impl Selector {
    fn new(entry: &ApiEntry, db: &ApiDatabase) -> Self {
        let mut names = vec![crate::text::tokenize_name(&entry.name)];
        names.extend(
            entry
                .modules
                .iter()
                .map(|m| crate::text::tokenize_name(&m.name)),
        );
        let foreign_links = db
            .entries()
            .iter()
            .filter(|e| e.id != entry.id)
            .flat_map(|e| e.resource_links.iter().map(|l| link_key(l)))
            .filter(|k| !k.is_empty())
            .collect();
        let mut dependency_names = Vec::new();
        for dep in &entry.dependencies {
            if let Some(d) = db.get(dep) {
                dependency_names.push(NameTokens::new(&d.name));
                dependency_names.push(NameTokens::new(&d.id));
            }
        }
        Selector {
            names,
            foreign_links,
            dependency_names,
        }
    }

    fn starts_with_name(&self, s: &Sentence) -> bool {
        let Some(first) = s.tokens.first().filter(|t| t.is_word()) else {
            return false;
        };
        let lead = name_token_sequence(&first.surface);
        lead.first()
            .is_some_and(|t| self.names.iter().any(|n| n.contains(t)))
    }

    fn starts_with_pronoun(s: &Sentence) -> bool {
        s.tokens
            .first()
            .is_some_and(|t| SUBJECT_PRONOUNS.contains(&t.normalized.as_str()))
    }

    fn references_other_api(&self, s: &Sentence) -> bool {
        let link_hit = s.links.iter().map(|l| link_key(l)).any(|l| {
            self.foreign_links
                .iter()
                .any(|f| l == *f || l.starts_with(&format!("{f}/")))
        });
        if link_hit {
            return true;
        }
        let words: Vec<&str> = s
            .tokens
            .iter()
            .filter(|t| t.is_word())
            .map(|t| t.surface.as_str())
            .collect();
        for len in 1..=3 {
            for w in words.windows(len) {
                let span = NameTokens::new(&w.join(" "));
                let named = self.dependency_names.iter().any(|d| {
                    matches!(
                        similarity_of(&span, d).0,
                        MatchKind::Exact | MatchKind::Prefix
                    )
                });
                if named {
                    return true;
                }
            }
        }
        false
    }
}

/// Keeps description sentences that start with the API or a module name,
/// pronoun sentences directly after those, and sentences that reference
/// another API by link or by dependency name.
pub fn select_description_sentences(
    api_id: &str,
    db: &ApiDatabase,
) -> Result<CandidateDescription> {
    let entry = db
        .get(api_id)
        .ok_or_else(|| Error::UnknownApi(api_id.to_string()))?;
    let selector = Selector::new(entry, db);
    let mut selected = Vec::new();
    for text in [&entry.portal_description, &entry.homepage_description] {
        let mut prev_named = false;
        for s in split_text(text) {
            if classify_sentence(&selector, &s, prev_named).is_some() {
                selected.push(s.clone());
            }
            prev_named = selector.starts_with_name(&s);
        }
    }
    let mut noun_set = BTreeSet::new();
    let mut verb_set = BTreeSet::new();
    for s in &selected {
        for t in &s.tokens {
            if !t.is_word() || is_stopword(&t.normalized) {
                continue;
            }
            match t.pos {
                Pos::Noun => {
                    noun_set.insert(t.normalized.clone());
                }
                Pos::Verb => {
                    verb_set.insert(t.normalized.clone());
                }
                Pos::Other => {}
            }
        }
    }
    Ok(CandidateDescription {
        api_id: api_id.to_string(),
        selected_sentences: selected,
        noun_set,
        verb_set,
    })
}

fn classify_sentence(sel: &Selector, s: &Sentence, prev_named: bool) -> Option<SelectionRule> {
    if sel.starts_with_name(s) {
        Some(SelectionRule::StartsWithName)
    } else if prev_named && Selector::starts_with_pronoun(s) {
        Some(SelectionRule::PronounFollowingName)
    } else if sel.references_other_api(s) {
        Some(SelectionRule::ReferencesOtherApi)
    } else {
        None
    }
}

/// Selected descriptions of every database entry, computed once per load.
#[derive(Debug, Clone, Default)]
pub struct DescriptionCache {
    by_id: HashMap<String, CandidateDescription>,
}

impl DescriptionCache {
    pub fn build(db: &ApiDatabase) -> Self {
        let by_id = db
            .entries()
            .iter()
            .map(|e| {
                let d = select_description_sentences(&e.id, db).expect("entry is in db");
                (e.id.clone(), d)
            })
            .collect();
        DescriptionCache { by_id }
    }

    pub fn get(&self, api_id: &str) -> Option<&CandidateDescription> {
        self.by_id.get(api_id)
    }
}

/// `(noun_sim, verb_sim)`, each the Jaccard index of the matching token sets.
pub fn context_similarity(ctx: &FeatureContext, desc: &CandidateDescription) -> (f64, f64) {
    (
        jaccard(&ctx.nouns(), &desc.noun_set),
        jaccard(&ctx.verbs(), &desc.verb_set),
    )
}
