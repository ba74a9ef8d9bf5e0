//! Thread preprocessing: markup stripping, code-block extraction, sentence
//! splitting, tokenization and POS tagging.

mod name;
mod pos;
mod stopwords;

use std::collections::HashSet;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use name::{jaccard, name_token_sequence, tokenize_name, PACKAGE_PREFIXES};
pub use pos::{lexicon_size, pos_tag, tag_word, Pos};
pub use stopwords::is_stopword;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub normalized: String,
    pub pos: Pos,
    /// Whether whitespace separated this token from the previous one.
    #[serde(default)]
    pub space_before: bool,
}

impl Token {
    pub fn is_word(&self) -> bool {
        self.normalized.chars().any(char::is_alphanumeric) && !self.is_url()
    }

    pub fn is_url(&self) -> bool {
        is_url(&self.surface)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub links: Vec<String>,
}

impl Sentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Surface text with the original spacing between tokens.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for (i, t) in self.tokens.iter().enumerate() {
            if i > 0 && t.space_before {
                out.push(' ');
            }
            out.push_str(&t.surface);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snippet {
    /// Number of sentences of the post that precede the snippet.
    pub position: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub post_id: String,
    pub sentences: Vec<Sentence>,
    pub snippets: Vec<Snippet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreadDoc {
    pub thread_id: String,
    pub title: Sentence,
    pub posts: Vec<Post>,
}

impl ThreadDoc {
    pub fn post(&self, post_id: &str) -> Option<(usize, &Post)> {
        self.posts
            .iter()
            .enumerate()
            .find(|(_, p)| p.post_id == post_id)
    }
}

/// On-disk thread document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawThread {
    pub thread_id: String,
    #[serde(default)]
    pub title: String,
    pub posts: Vec<RawPost>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPost {
    pub id: String,
    pub body: String,
}

pub fn parse_raw_thread(json: &str) -> Result<RawThread> {
    serde_json::from_str(json).map_err(|e| Error::Thread(e.to_string()))
}

pub fn load_thread(path: &Path) -> Result<ThreadDoc> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let located = |msg: String| Error::Thread(format!("{}: {msg}", path.display()));
    let raw: RawThread = serde_json::from_str(&text).map_err(|e| located(e.to_string()))?;
    preprocess_thread(&raw).map_err(|e| match e {
        Error::Thread(msg) => located(msg),
        other => other,
    })
}

/// One thread file, or every `.json` file of a directory in name order.
pub fn load_threads(path: &Path) -> Result<Vec<ThreadDoc>> {
    if !path.is_dir() {
        return Ok(vec![load_thread(path)?]);
    }
    let mut files = Vec::new();
    for entry in std::fs::read_dir(path).map_err(|e| Error::io(path, e))? {
        let p = entry.map_err(|e| Error::io(path, e))?.path();
        if p.is_file() && p.extension().is_some_and(|x| x == "json") {
            files.push(p);
        }
    }
    files.sort();
    let mut seen = HashSet::new();
    let mut docs = Vec::with_capacity(files.len());
    for f in files {
        let doc = load_thread(&f)?;
        if !seen.insert(doc.thread_id.clone()) {
            return Err(Error::Thread(format!(
                "{}: duplicate thread id `{}`",
                f.display(),
                doc.thread_id
            )));
        }
        docs.push(doc);
    }
    Ok(docs)
}

pub fn preprocess_thread(raw: &RawThread) -> Result<ThreadDoc> {
    if raw.thread_id.trim().is_empty() {
        return Err(Error::Thread("empty thread_id".into()));
    }
    if raw.posts.is_empty() {
        return Err(Error::Thread(format!(
            "thread `{}` has no posts",
            raw.thread_id
        )));
    }
    let mut seen = HashSet::new();
    let mut posts = Vec::with_capacity(raw.posts.len());
    for p in &raw.posts {
        if p.id.is_empty() || p.id.starts_with('#') {
            return Err(Error::Thread(format!("invalid post id `{}`", p.id)));
        }
        if !seen.insert(p.id.as_str()) {
            return Err(Error::Thread(format!("duplicate post id `{}`", p.id)));
        }
        posts.push(preprocess_post(&p.id, &p.body));
    }
    let title_text = html_escape::decode_html_entities(&strip_tags(&raw.title)).into_owned();
    Ok(ThreadDoc {
        thread_id: raw.thread_id.clone(),
        title: pos_tag(tokenize_sentence(&title_text)),
        posts,
    })
}

static CODE_BLOCK: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?s)<pre[^>]*>\s*<code[^>]*>(?P<html>.*?)</code>\s*</pre>|<pre[^>]*>(?P<pre>.*?)</pre>|(?m:^[ \t]*```[^\n]*\n)(?P<fence>.*?)(?m:^[ \t]*```[ \t]*$)",
    )
    .unwrap()
});

static BLOCK_TAG: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)</?(p|br|div|li|ul|ol|h[1-6]|blockquote|tr|table|hr)\b[^>]*>").unwrap()
});

static ANY_TAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"</?[A-Za-z][^>]*>").unwrap());

static PARAGRAPH_BREAK: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\n[ \t]*\n").unwrap());

fn strip_tags(html: &str) -> String {
    let blocks = BLOCK_TAG.replace_all(html, "\n\n");
    ANY_TAG.replace_all(&blocks, "").into_owned()
}

fn preprocess_post(post_id: &str, body: &str) -> Post {
    let mut sentences = Vec::new();
    let mut snippets = Vec::new();
    let mut last = 0;
    for caps in CODE_BLOCK.captures_iter(body) {
        let whole = caps.get(0).unwrap();
        push_text(&body[last..whole.start()], &mut sentences);
        let code = caps
            .name("html")
            .or_else(|| caps.name("pre"))
            .or_else(|| caps.name("fence"))
            .map_or("", |m| m.as_str());
        // the fence pattern swallows the newline before the closing marker
        let code = if caps.name("fence").is_some() {
            code.strip_suffix('\n').unwrap_or(code)
        } else {
            code
        };
        snippets.push(Snippet {
            position: sentences.len(),
            text: code.to_string(),
        });
        last = whole.end();
    }
    push_text(&body[last..], &mut sentences);
    Post {
        post_id: post_id.to_string(),
        sentences,
        snippets,
    }
}

/// Splits free text (plain or light HTML) into tagged sentences.
pub fn split_text(text: &str) -> Vec<Sentence> {
    let mut out = Vec::new();
    push_text(text, &mut out);
    out
}

fn push_text(segment: &str, sentences: &mut Vec<Sentence>) {
    let stripped = strip_tags(segment);
    let text = html_escape::decode_html_entities(&stripped);
    for paragraph in PARAGRAPH_BREAK.split(&text) {
        for s in split_sentences(tokenize_sentence(paragraph)) {
            sentences.push(pos_tag(s));
        }
    }
}

static TOKEN: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r#"(?P<url>(?:https?|ftp)://[^\s<>"'()\[\]]+|www\.[^\s<>"'()\[\]]+)|(?P<word>[\p{L}\p{N}_]+(?:[-'.][\p{L}\p{N}_]+)*)|(?P<punct>\S)"#,
    )
    .unwrap()
});

const URL_TRAILING: &[char] = &['.', ',', ';', ':', '!', '?'];

fn is_url(s: &str) -> bool {
    s.starts_with("http://")
        || s.starts_with("https://")
        || s.starts_with("ftp://")
        || s.starts_with("www.")
}

fn normalize(surface: &str) -> String {
    let lower = surface.to_lowercase();
    if is_url(surface) {
        return lower;
    }
    let trimmed = lower.trim_matches(|c: char| !c.is_alphanumeric());
    if trimmed.is_empty() {
        lower
    } else {
        trimmed.to_string()
    }
}

/// Tokenizes text into one sentence (no splitting); tags are left as OTHER.
pub fn tokenize_sentence(text: &str) -> Sentence {
    let mut sentence = Sentence::default();
    let mut pos = 0;
    let mut prev_end: Option<usize> = None;
    while let Some(caps) = TOKEN.captures_at(text, pos) {
        let m = caps.get(0).unwrap();
        let mut end = m.end();
        if caps.name("url").is_some() {
            let trimmed = m.as_str().trim_end_matches(URL_TRAILING);
            end = m.start() + trimmed.len();
        }
        let surface = &text[m.start()..end];
        let space_before = prev_end.is_some_and(|p| p < m.start());
        if is_url(surface) {
            sentence.links.push(surface.to_string());
        }
        sentence.tokens.push(Token {
            surface: surface.to_string(),
            normalized: normalize(surface),
            pos: Pos::Other,
            space_before,
        });
        prev_end = Some(end);
        pos = end;
    }
    sentence
}

const ABBREVIATIONS: [&str; 5] = ["e.g", "i.e", "etc", "vs", "cf"];

fn is_terminal(t: &Token) -> bool {
    matches!(t.surface.as_str(), "." | "!" | "?")
}

/// Splits a token stream on `. ! ?` followed by whitespace and an uppercase
/// letter or digit.
fn split_sentences(all: Sentence) -> Vec<Sentence> {
    let tokens = all.tokens;
    let mut out = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    for i in 0..tokens.len() {
        current.push(tokens[i].clone());
        if !is_terminal(&tokens[i]) {
            continue;
        }
        let Some(next) = tokens.get(i + 1) else {
            continue;
        };
        if is_terminal(next) || !next.space_before {
            continue;
        }
        if !next
            .surface
            .chars()
            .next()
            .is_some_and(|c| c.is_uppercase() || c.is_ascii_digit())
        {
            continue;
        }
        let after_abbrev = i > 0
            && tokens[i].surface == "."
            && ABBREVIATIONS.contains(&tokens[i - 1].normalized.as_str());
        if after_abbrev {
            continue;
        }
        out.push(finish(std::mem::take(&mut current)));
    }
    if !current.is_empty() {
        out.push(finish(current));
    }
    out
}

fn finish(mut tokens: Vec<Token>) -> Sentence {
    if let Some(first) = tokens.first_mut() {
        first.space_before = false;
    }
    let links = tokens
        .iter()
        .filter(|t| t.is_url())
        .map(|t| t.surface.clone())
        .collect();
    Sentence { tokens, links }
}
