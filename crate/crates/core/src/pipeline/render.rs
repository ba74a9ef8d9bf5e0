use std::collections::BTreeMap;
use std::fmt::Write as _;

use html_escape::{encode_double_quoted_attribute, encode_text};
use serde::{Deserialize, Serialize};

use super::{Outcome, Provenance, ResolutionDecision};
use crate::api_db::ApiDatabase;
use crate::classifier::Label;
use crate::context::select_description_sentences;
use crate::detect::TITLE_POST_ID;
use crate::text::{split_text, Sentence, ThreadDoc};
use crate::{Error, Result};

pub const RECORDS_VERSION: u32 = 1;
const EXCERPT_CHARS: usize = 200;

/// One line of the records output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionRecord {
    pub version: u32,
    pub thread_id: String,
    pub post_id: String,
    pub sentence_index: usize,
    pub start: usize,
    pub end: usize,
    pub surface: String,
    pub outcome: Label,
    pub api_id: Option<String>,
    pub api_name: Option<String>,
    pub module: Option<String>,
    pub url: Option<String>,
    pub description: Option<String>,
    pub provenance: Provenance,
    pub confidence: f64,
}

fn excerpt(text: &str) -> String {
    let mut out: String = text.chars().take(EXCERPT_CHARS).collect();
    if text.chars().count() > EXCERPT_CHARS {
        out.push_str("...");
    }
    out
}

fn description_excerpt(db: &ApiDatabase, api_id: &str, module: Option<&str>) -> Option<String> {
    let entry = db.get(api_id)?;
    if let Some(m) = module.and_then(|m| entry.module(m)) {
        if !m.description.trim().is_empty() {
            return Some(excerpt(m.description.trim()));
        }
    }
    let selected = select_description_sentences(api_id, db).ok()?;
    let first = selected
        .selected_sentences
        .first()
        .map(Sentence::text)
        .or_else(|| {
            split_text(&entry.portal_description)
                .first()
                .map(Sentence::text)
        })
        .or_else(|| {
            split_text(&entry.homepage_description)
                .first()
                .map(Sentence::text)
        })?;
    Some(excerpt(&first))
}

pub fn to_records(decisions: &[ResolutionDecision], db: &ApiDatabase) -> Vec<DecisionRecord> {
    decisions
        .iter()
        .map(|d| {
            let m = &d.mention;
            let (api_id, module, url) = match &d.outcome {
                Outcome::FalseMention => (None, None, None),
                Outcome::Api {
                    api_id,
                    module,
                    url,
                } => (Some(api_id.clone()), module.clone(), url.clone()),
            };
            let api_name = api_id
                .as_deref()
                .and_then(|id| db.get(id))
                .map(|e| e.name.clone());
            let description = api_id
                .as_deref()
                .and_then(|id| description_excerpt(db, id, module.as_deref()));
            DecisionRecord {
                version: RECORDS_VERSION,
                thread_id: m.thread_id.clone(),
                post_id: m.post_id.clone(),
                sentence_index: m.sentence_index,
                start: m.start,
                end: m.end,
                surface: m.surface.clone(),
                outcome: d.outcome.label(),
                api_id,
                api_name,
                module,
                url,
                description,
                provenance: d.provenance,
                confidence: d.confidence,
            }
        })
        .collect()
}

pub fn render_records(records: &[DecisionRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn parse_records(text: &str, context: &str) -> Result<Vec<DecisionRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: DecisionRecord =
            serde_json::from_str(line).map_err(|e| Error::parse(context, i + 1, e))?;
        if r.version != RECORDS_VERSION {
            return Err(Error::parse(
                context,
                i + 1,
                format!("unsupported records version {}", r.version),
            ));
        }
        if (r.outcome == Label::TrueApi) != r.api_id.is_some() {
            return Err(Error::parse(context, i + 1, "outcome and api_id disagree"));
        }
        out.push(r);
    }
    Ok(out)
}

const STYLE: &str = "\
body{font-family:sans-serif;max-width:48em;margin:2em auto;line-height:1.5}
.post{border-top:1px solid #ccc;padding:.5em 0}
.mention{position:relative;padding:0 2px;border-radius:2px}
.true-api{background:#b7ebb0}
.false-mention{background:#f3b6b6}
.true-api>a{color:inherit}
.tooltip{display:none;position:absolute;left:0;top:1.6em;z-index:1;width:22em;padding:.5em;background:#fff;border:1px solid #888;font-size:.9em}
.true-api:hover .tooltip{display:block}
.tooltip .desc{display:block;border-top:1px solid #ddd;margin-top:.3em;padding-top:.3em}
pre{background:#f4f4f4;padding:.5em;overflow:auto}
";

/// Checks that every record points at the tokens it names in `doc`.
fn index_records<'r>(
    records: &'r [DecisionRecord],
    doc: &ThreadDoc,
) -> Result<BTreeMap<(String, usize), Vec<&'r DecisionRecord>>> {
    let mut by_sentence: BTreeMap<(String, usize), Vec<&DecisionRecord>> = BTreeMap::new();
    for r in records {
        if r.thread_id != doc.thread_id {
            return Err(Error::Render(format!(
                "decision for thread `{}` given with thread `{}`",
                r.thread_id, doc.thread_id
            )));
        }
        let sentence = sentence_of(doc, &r.post_id, r.sentence_index).ok_or_else(|| {
            Error::Render(format!(
                "no sentence {} in post `{}`",
                r.sentence_index, r.post_id
            ))
        })?;
        if r.start >= r.end || r.end > sentence.len() {
            return Err(Error::Render(format!(
                "span {}..{} out of range in `{}`",
                r.start, r.end, r.post_id
            )));
        }
        let text: Vec<&str> = sentence.tokens[r.start..r.end]
            .iter()
            .map(|t| t.surface.as_str())
            .collect();
        if text.join(" ") != r.surface {
            return Err(Error::Render(format!(
                "span {}..{} in `{}` reads `{}`, not `{}`",
                r.start,
                r.end,
                r.post_id,
                text.join(" "),
                r.surface
            )));
        }
        by_sentence
            .entry((r.post_id.clone(), r.sentence_index))
            .or_default()
            .push(r);
    }
    for spans in by_sentence.values_mut() {
        spans.sort_by_key(|r| r.start);
        if spans.windows(2).any(|w| w[1].start < w[0].end) {
            return Err(Error::Render(format!(
                "overlapping decisions in `{}`",
                spans[0].post_id
            )));
        }
    }
    Ok(by_sentence)
}

fn sentence_of<'d>(doc: &'d ThreadDoc, post_id: &str, index: usize) -> Option<&'d Sentence> {
    if post_id == TITLE_POST_ID {
        return (index == 0).then_some(&doc.title);
    }
    doc.post(post_id)?.1.sentences.get(index)
}

fn write_mention(out: &mut String, r: &DecisionRecord, surface: &str) {
    match (&r.api_id, r.outcome) {
        (Some(api), Label::TrueApi) => {
            let _ = write!(
                out,
                "<span class=\"mention true-api\" data-api=\"{}\"",
                encode_double_quoted_attribute(api)
            );
            if let Some(m) = &r.module {
                let _ = write!(
                    out,
                    " data-module=\"{}\"",
                    encode_double_quoted_attribute(m)
                );
            }
            out.push('>');
            match &r.url {
                Some(url) => {
                    let _ = write!(
                        out,
                        "<a href=\"{}\">{}</a>",
                        encode_double_quoted_attribute(url),
                        surface
                    );
                }
                None => out.push_str(surface),
            }
            out.push_str("<span class=\"tooltip\"><strong>");
            out.push_str(&encode_text(r.api_name.as_deref().unwrap_or(api)));
            out.push_str("</strong>");
            if let Some(m) = &r.module {
                let _ = write!(out, " / {}", encode_text(m));
            }
            if let Some(d) = &r.description {
                let _ = write!(out, "<span class=\"desc\">{}</span>", encode_text(d));
            }
            if let Some(url) = &r.url {
                let _ = write!(
                    out,
                    "<span class=\"homepage\">Homepage: {}</span>",
                    encode_text(url)
                );
            }
            out.push_str("</span></span>");
        }
        _ => {
            let _ = write!(
                out,
                "<span class=\"mention false-mention\">{surface}</span>"
            );
        }
    }
}

fn write_sentence(out: &mut String, s: &Sentence, spans: &[&DecisionRecord]) {
    let mut i = 0;
    let mut spans = spans.iter().peekable();
    while i < s.tokens.len() {
        if i > 0 && s.tokens[i].space_before {
            out.push(' ');
        }
        match spans.peek() {
            Some(r) if r.start == i => {
                let surface = s.tokens[r.start..r.end]
                    .iter()
                    .enumerate()
                    .map(|(k, t)| {
                        let sep = if k > 0 && t.space_before { " " } else { "" };
                        format!("{sep}{}", encode_text(&t.surface))
                    })
                    .collect::<String>();
                write_mention(out, r, &surface);
                i = r.end;
                spans.next();
            }
            _ => {
                out.push_str(&encode_text(&s.tokens[i].surface));
                i += 1;
            }
        }
    }
}

/// The thread as a standalone page: true mentions highlighted green with a
/// hover card and a link, false mentions red.
pub fn render_html(records: &[DecisionRecord], doc: &ThreadDoc) -> Result<String> {
    let by_sentence = index_records(records, doc)?;
    let spans_of = |post: &str, si: usize| -> &[&DecisionRecord] {
        by_sentence
            .get(&(post.to_string(), si))
            .map_or(&[], |v| &v[..])
    };
    let mut out = String::new();
    out.push_str("<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n");
    let _ = writeln!(out, "<title>{}</title>", encode_text(&doc.title.text()));
    let _ = writeln!(out, "<style>\n{STYLE}</style>\n</head>\n<body>");
    let _ = writeln!(
        out,
        "<article class=\"thread\" data-thread=\"{}\">",
        encode_double_quoted_attribute(&doc.thread_id)
    );
    out.push_str("<h1>");
    write_sentence(&mut out, &doc.title, spans_of(TITLE_POST_ID, 0));
    out.push_str("</h1>\n");
    for post in &doc.posts {
        let _ = writeln!(
            out,
            "<section class=\"post\" id=\"post-{}\">",
            encode_double_quoted_attribute(&post.post_id)
        );
        let mut snippets = post.snippets.iter().peekable();
        for (si, s) in post.sentences.iter().enumerate() {
            while let Some(sn) = snippets.next_if(|sn| sn.position <= si) {
                let _ = writeln!(
                    out,
                    "<pre><code>{}</code></pre>",
                    encode_text(&html_escape::decode_html_entities(&sn.text))
                );
            }
            out.push_str("<p>");
            write_sentence(&mut out, s, spans_of(&post.post_id, si));
            out.push_str("</p>\n");
        }
        for sn in snippets {
            let _ = writeln!(
                out,
                "<pre><code>{}</code></pre>",
                encode_text(&html_escape::decode_html_entities(&sn.text))
            );
        }
        out.push_str("</section>\n");
    }
    out.push_str("</article>\n</body>\n</html>\n");
    Ok(out)
}
