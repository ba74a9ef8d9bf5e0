//! Deterministic lexicon + suffix part-of-speech tagger.

use std::collections::HashMap;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use super::Sentence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Pos {
    Noun,
    Verb,
    Other,
}

static LEXICON: LazyLock<HashMap<&'static str, Pos>> = LazyLock::new(|| {
    include_str!("../../data/lexicon.tsv")
        .lines()
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter_map(|l| {
            let (word, tag) = l.split_once('\t')?;
            let pos = match tag.trim() {
                "NOUN" => Pos::Noun,
                "VERB" => Pos::Verb,
                _ => Pos::Other,
            };
            Some((word, pos))
        })
        .collect()
});

const VERB_SUFFIXES: [&str; 3] = ["ing", "ize", "ed"];
const NOUN_SUFFIXES: [&str; 4] = ["tion", "ment", "er", "or"];

pub fn lexicon_size() -> usize {
    LEXICON.len()
}

fn lookup(word: &str) -> Option<Pos> {
    if let Some(pos) = LEXICON.get(word) {
        return Some(*pos);
    }
    // inflected forms of lexicon entries: plurals and third person
    let stems = [
        word.strip_suffix("ies").map(|s| format!("{s}y")),
        word.strip_suffix("es").map(str::to_string),
        word.strip_suffix('s').map(str::to_string),
    ];
    stems
        .into_iter()
        .flatten()
        .filter(|s| s.len() >= 2)
        .find_map(|s| LEXICON.get(s.as_str()).copied())
}

fn has_suffix(word: &str, suffix: &str) -> bool {
    word.len() >= suffix.len() + 3 && word.ends_with(suffix)
}

/// Tags one token from its surface and normalized forms.
pub fn tag_word(surface: &str, normalized: &str) -> Pos {
    if !normalized.chars().any(char::is_alphabetic) || normalized.contains("://") {
        return Pos::Other;
    }
    if let Some(pos) = lookup(normalized) {
        return pos;
    }
    if VERB_SUFFIXES.iter().any(|s| has_suffix(normalized, s)) {
        return Pos::Verb;
    }
    if NOUN_SUFFIXES.iter().any(|s| has_suffix(normalized, s)) {
        return Pos::Noun;
    }
    if surface.chars().next().is_some_and(char::is_uppercase) {
        return Pos::Noun;
    }
    Pos::Other
}

/// Fills the tag of every token in the sentence.
pub fn pos_tag(mut sentence: Sentence) -> Sentence {
    for token in &mut sentence.tokens {
        token.pos = tag_word(&token.surface, &token.normalized);
    }
    sentence
}
