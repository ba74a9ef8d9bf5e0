//! Island parsing of code snippets, assignment of code terms to mentions,
//! and linking of type names to candidate APIs.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::api_db::ApiDatabase;
use crate::detect::{Candidate, Mention};
use crate::text::{Post, ThreadDoc, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SnippetStatus {
    ValidJavaLike,
    DiscardedNonJava,
    DiscardedMalformed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSnippet {
    pub raw: String,
    pub status: SnippetStatus,
    pub imports: Vec<String>,
    pub declared_types: BTreeSet<String>,
    pub used_types: BTreeSet<String>,
}

impl CodeSnippet {
    pub fn is_valid(&self) -> bool {
        self.status == SnippetStatus::ValidJavaLike
    }
}

/// java.lang types and annotations every Java file sees without an import.
pub const JAVA_LANG_DEFAULTS: &[&str] = &[
    "Appendable",
    "ArithmeticException",
    "ArrayIndexOutOfBoundsException",
    "AutoCloseable",
    "Boolean",
    "Byte",
    "CharSequence",
    "Character",
    "Class",
    "ClassCastException",
    "ClassNotFoundException",
    "CloneNotSupportedException",
    "Cloneable",
    "Comparable",
    "Deprecated",
    "Double",
    "Enum",
    "Error",
    "Exception",
    "Float",
    "FunctionalInterface",
    "IllegalArgumentException",
    "IllegalStateException",
    "IndexOutOfBoundsException",
    "Integer",
    "InterruptedException",
    "Iterable",
    "Long",
    "Math",
    "NullPointerException",
    "Number",
    "NumberFormatException",
    "Object",
    "Override",
    "Process",
    "Record",
    "Runnable",
    "Runtime",
    "RuntimeException",
    "SafeVarargs",
    "Short",
    "StackOverflowError",
    "StrictMath",
    "String",
    "StringBuffer",
    "StringBuilder",
    "SuppressWarnings",
    "System",
    "Thread",
    "ThreadLocal",
    "Throwable",
    "UnsupportedOperationException",
    "Void",
];

static NON_JAVA: LazyLock<Vec<Regex>> = LazyLock::new(|| {
    [
        r"(?m)^\s*#\s*include\b",
        r"(?m)^\s*using\s+System\b",
        r"\bConsole\.Write(Line)?\s*\(",
        r"(?m)^\s*namespace\s+[\w.]+",
        r"(?m)^\s*def\s+\w+\s*\(.*\)\s*:",
        r"(?m)^\s*from\s+[\w.]+\s+import\b",
        r"<\?php",
        r"(?m)^\s*func\s+\w*\s*\(",
        r"(?m)^\s*fn\s+\w+\s*[(<]",
        r"(?m)^\s*package\s+main\s*$",
        r"\bstd::",
        r"(?m)^\s*\$\w+\s*=",
        r"\bconsole\.log\s*\(",
        r"(?m)^\s*Dim\s+\w+\s+As\b",
        r"(?m)^\s*(var|let|const)\s+\w+\s*=\s*(require\s*\(|function\b|\(.*\)\s*=>)",
    ]
    .iter()
    .map(|p| Regex::new(p).unwrap())
    .collect()
});

static MARKUP_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*</?[A-Za-z?!][^>]*>").unwrap());

static IMPORT: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^\s*import\s+(static\s+)?([A-Za-z_$][\w$]*(?:\s*\.\s*[A-Za-z_$][\w$]*)*(?:\s*\.\s*\*)?)\s*;?\s*$")
        .unwrap()
});

static PACKAGE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*package\s+[\w.]+\s*;?\s*$").unwrap());

static DECLARATION: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\b(?:[Cc]lass|interface|enum|@\s*interface)\s+([A-Z][\w$]*)").unwrap()
});

static QUALIFIED: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[A-Za-z_$][\w$]*(?:\.[A-Za-z_$][\w$]*)*").unwrap());

/// Markup lines at or above this share of non-empty lines make a snippet malformed.
const MARKUP_RATIO: f64 = 0.25;

fn is_type_like(ident: &str) -> bool {
    ident.chars().next().is_some_and(|c| c.is_ascii_uppercase())
        && ident.chars().any(|c| c.is_ascii_lowercase())
}

/// Blanks out comments and string/char literal contents, keeping newlines
/// and delimiters outside literals.
fn strip_comments_and_literals(src: &str) -> String {
    let mut out = String::with_capacity(src.len());
    let mut chars = src.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '/' if chars.peek() == Some(&'/') => {
                for n in chars.by_ref() {
                    if n == '\n' {
                        out.push('\n');
                        break;
                    }
                }
            }
            '/' if chars.peek() == Some(&'*') => {
                chars.next();
                let mut prev = ' ';
                for n in chars.by_ref() {
                    if n == '\n' {
                        out.push('\n');
                    }
                    if prev == '*' && n == '/' {
                        break;
                    }
                    prev = n;
                }
                out.push(' ');
            }
            '"' | '\'' => {
                out.push(c);
                let mut escaped = false;
                for n in chars.by_ref() {
                    if n == '\n' {
                        out.push('\n');
                        break;
                    }
                    if escaped {
                        escaped = false;
                    } else if n == '\\' {
                        escaped = true;
                    } else if n == c {
                        break;
                    }
                }
                out.push(c);
            }
            _ => out.push(c),
        }
    }
    out
}

fn balanced(code: &str) -> bool {
    let mut stack = Vec::new();
    for c in code.chars() {
        match c {
            '(' | '{' | '[' => stack.push(c),
            ')' | '}' | ']' => {
                let open = match c {
                    ')' => '(',
                    '}' => '{',
                    _ => '[',
                };
                if stack.pop() != Some(open) {
                    return false;
                }
            }
            _ => {}
        }
    }
    stack.is_empty()
}

fn discarded(raw: &str, status: SnippetStatus) -> CodeSnippet {
    CodeSnippet {
        raw: raw.to_string(),
        status,
        imports: Vec::new(),
        declared_types: BTreeSet::new(),
        used_types: BTreeSet::new(),
    }
}

/// Island parse of one snippet: imports, type declarations and type usages,
/// behind a validity gate.
pub fn parse_snippet(raw: &str) -> CodeSnippet {
    let decoded = html_escape::decode_html_entities(raw);
    if NON_JAVA.iter().any(|re| re.is_match(&decoded)) {
        return discarded(raw, SnippetStatus::DiscardedNonJava);
    }
    let lines: Vec<&str> = decoded.lines().filter(|l| !l.trim().is_empty()).collect();
    if lines.is_empty() {
        return discarded(raw, SnippetStatus::DiscardedMalformed);
    }
    let markup = lines.iter().filter(|l| MARKUP_LINE.is_match(l)).count();
    if markup as f64 / lines.len() as f64 >= MARKUP_RATIO {
        return discarded(raw, SnippetStatus::DiscardedMalformed);
    }
    let code = strip_comments_and_literals(&decoded);
    if !balanced(&code) {
        return discarded(raw, SnippetStatus::DiscardedMalformed);
    }

    let mut imports = Vec::new();
    let mut body = String::new();
    for line in code.lines() {
        if let Some(caps) = IMPORT.captures(line) {
            if caps.get(1).is_none() {
                let path: String = caps[2].chars().filter(|c| !c.is_whitespace()).collect();
                imports.push(path);
            }
            continue;
        }
        if PACKAGE.is_match(line) {
            continue;
        }
        body.push_str(line);
        body.push('\n');
    }

    let has_structure = !imports.is_empty()
        || body.contains(';')
        || body.contains('{')
        || body.contains('@')
        || (body.contains('(') && body.contains(')'));
    if !has_structure {
        return discarded(raw, SnippetStatus::DiscardedMalformed);
    }

    let mut declared_types = BTreeSet::new();
    let mut declaration_sites = BTreeSet::new();
    for caps in DECLARATION.captures_iter(&body) {
        let name = caps.get(1).unwrap();
        declared_types.insert(name.as_str().to_string());
        declaration_sites.insert(name.start());
        // the keyword itself is not a type usage when written "Class"
        declaration_sites.insert(caps.get(0).unwrap().start());
    }

    let mut used_types = BTreeSet::new();
    for m in QUALIFIED.find_iter(&body) {
        if declaration_sites.contains(&m.start()) {
            continue;
        }
        // skip member accesses such as `mapper.readValue` continuing a chain
        if body[..m.start()].ends_with('.') {
            continue;
        }
        if let Some(t) = type_in_chain(m.as_str()) {
            used_types.insert(t);
        }
    }

    CodeSnippet {
        raw: raw.to_string(),
        status: SnippetStatus::ValidJavaLike,
        imports,
        declared_types,
        used_types,
    }
}

/// The type named by a dotted chain: a fully qualified name when at least
/// two lowercase package segments precede the first type-like segment,
/// otherwise the bare type-like segment.
fn type_in_chain(chain: &str) -> Option<String> {
    let segments: Vec<&str> = chain.split('.').collect();
    let pos = segments.iter().position(|s| is_type_like(s))?;
    let package = &segments[..pos];
    let package_like = package.len() >= 2
        && package
            .iter()
            .all(|s| s.chars().next().is_some_and(|c| c.is_ascii_lowercase()));
    if package_like {
        Some(segments[..=pos].join("."))
    } else {
        Some(segments[pos].to_string())
    }
}

static PROSE_CAMEL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[A-Z][a-z0-9]+(?:[A-Z][a-z0-9]*)+$").unwrap());
static PROSE_FQN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[a-z][\w]*(?:\.[a-z][\w]*)+\.[A-Z][\w]*$").unwrap());

/// Code terms written inline in prose: camel-case identifiers with at least
/// two humps, or fully qualified type names.
pub fn prose_type(token: &Token) -> Option<String> {
    let s = token.surface.as_str();
    if PROSE_FQN.is_match(s) && s.rsplit('.').next().is_some_and(is_type_like) {
        return Some(s.to_string());
    }
    if PROSE_CAMEL.is_match(s) {
        return Some(s.to_string());
    }
    None
}

pub fn unqualified(name: &str) -> &str {
    name.rsplit('.').next().unwrap_or(name)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeContext {
    pub types: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeConfig {
    /// Drop java.lang defaults from code contexts.
    pub filter_java_lang: bool,
}

impl Default for CodeConfig {
    fn default() -> Self {
        CodeConfig {
            filter_java_lang: true,
        }
    }
}

/// Parsed snippets of every post, keyed by post id.
pub fn parse_post_snippets(post: &Post) -> Vec<CodeSnippet> {
    post.snippets
        .iter()
        .map(|s| parse_snippet(&s.text))
        .collect()
}

/// Position of a code term or mention while scanning a post: sentence index,
/// then 0 for snippets placed before that sentence and 1 for tokens, then
/// token index.
type ScanKey = (usize, u8, usize);

struct Term {
    key: ScanKey,
    name: String,
}

/// Assigns every code term of each post to one of its mentions and returns
/// one context per input mention, in input order.
pub fn extract_code_context(
    doc: &ThreadDoc,
    mentions: &[Mention],
    config: &CodeConfig,
) -> Vec<CodeContext> {
    let mut out = vec![CodeContext::default(); mentions.len()];
    for post in &doc.posts {
        let mut in_post: Vec<usize> = (0..mentions.len())
            .filter(|&i| mentions[i].post_id == post.post_id)
            .collect();
        if in_post.is_empty() {
            continue;
        }
        in_post.sort_by_key(|&i| (mentions[i].sentence_index, mentions[i].start));

        let snippets = parse_post_snippets(post);
        let declared: BTreeSet<&str> = snippets
            .iter()
            .flat_map(|s| s.declared_types.iter().map(String::as_str))
            .collect();

        let mut terms = Vec::new();
        for (snippet, parsed) in post.snippets.iter().zip(&snippets) {
            for t in &parsed.used_types {
                terms.push(Term {
                    key: (snippet.position, 0, 0),
                    name: t.clone(),
                });
            }
        }
        for (si, s) in post.sentences.iter().enumerate() {
            for (ti, tok) in s.tokens.iter().enumerate() {
                let covered = in_post.iter().any(|&m| {
                    let m = &mentions[m];
                    m.sentence_index == si && ti >= m.start && ti < m.end
                });
                if covered {
                    continue;
                }
                if let Some(name) = prose_type(tok) {
                    terms.push(Term {
                        key: (si, 1, ti),
                        name,
                    });
                }
            }
        }

        for term in terms {
            if declared.contains(term.name.as_str()) {
                continue;
            }
            if config.filter_java_lang && is_java_lang(&term.name) {
                continue;
            }
            let owner = if in_post.len() == 1 {
                in_post[0]
            } else {
                nearest_mention(&term, &in_post, mentions)
            };
            out[owner].types.insert(term.name);
        }
    }
    out
}

fn is_java_lang(name: &str) -> bool {
    match name.strip_prefix("java.lang.") {
        Some(rest) => !rest.contains('.'),
        None => !name.contains('.') && JAVA_LANG_DEFAULTS.contains(&name),
    }
}

/// Same-sentence mentions win by token distance (ties go to the preceding
/// mention); otherwise the last mention before the term, or the first one
/// after it when none precedes.
fn nearest_mention(term: &Term, ordered: &[usize], mentions: &[Mention]) -> usize {
    let (si, kind, ti) = term.key;
    if kind == 1 {
        let same: Vec<usize> = ordered
            .iter()
            .copied()
            .filter(|&m| mentions[m].sentence_index == si)
            .collect();
        if !same.is_empty() {
            return *same
                .iter()
                .min_by_key(|&&m| {
                    let mm = &mentions[m];
                    let (dist, after) = if ti < mm.start {
                        (mm.start - ti, 1)
                    } else {
                        (ti + 1 - mm.end, 0)
                    };
                    (dist, after)
                })
                .unwrap();
        }
    }
    let key_of = |m: usize| (mentions[m].sentence_index, 1u8, mentions[m].start);
    ordered
        .iter()
        .copied()
        .rfind(|&m| key_of(m) < term.key)
        .unwrap_or(ordered[0])
}

fn import_prefix(import: &str) -> &str {
    import.trim_end_matches('*').trim_end_matches('.')
}

/// Whether `type_name`, seen unqualified, resolves to `fqn` through one of
/// the snippets' imports.
pub fn is_in_imported(type_name: &str, fqn: &str, snippets: &[CodeSnippet]) -> bool {
    snippets
        .iter()
        .filter(|s| s.is_valid())
        .flat_map(|s| s.imports.iter())
        .any(|import| {
            if import.ends_with('*') {
                format!("{}.{type_name}", import_prefix(import)) == fqn
            } else {
                unqualified(import) == type_name && import == fqn
            }
        })
}

/// Links a type name to the candidates it may belong to: exact FQN matches,
/// else import-confirmed unqualified matches, else all unqualified matches.
pub fn link_type(
    candidates: &[Candidate],
    type_name: &str,
    snippets: &[CodeSnippet],
    db: &ApiDatabase,
) -> BTreeSet<String> {
    let mut linked = BTreeSet::new();
    let mut by_simple: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut all_simple = BTreeSet::new();
    for c in candidates {
        let Some(entry) = db.get(&c.api_id) else {
            continue;
        };
        for t in &entry.type_index {
            if t == type_name {
                linked.insert(c.api_id.clone());
            } else if unqualified(t) == type_name {
                by_simple.entry(c.api_id.as_str()).or_default().push(t);
                all_simple.insert(c.api_id.clone());
            }
        }
    }
    for (api, types) in by_simple {
        if types.iter().any(|t| is_in_imported(type_name, t, snippets)) {
            linked.insert(api.to_string());
        }
    }
    if linked.is_empty() {
        all_simple
    } else {
        linked
    }
}

/// Links for every type of a code context.
pub fn link_types(
    ctx: &CodeContext,
    candidates: &[Candidate],
    snippets: &[CodeSnippet],
    db: &ApiDatabase,
) -> BTreeMap<String, BTreeSet<String>> {
    ctx.types
        .iter()
        .map(|t| (t.clone(), link_type(candidates, t, snippets, db)))
        .collect()
}

/// Share of the mention's context types that link to the candidate; 0 for
/// an empty context.
pub fn structural_similarity(
    ctx: &CodeContext,
    api_id: &str,
    links: &BTreeMap<String, BTreeSet<String>>,
) -> f64 {
    if ctx.types.is_empty() {
        return 0.0;
    }
    let shared = ctx
        .types
        .iter()
        .filter(|t| links.get(*t).is_some_and(|l| l.contains(api_id)))
        .count();
    shared as f64 / ctx.types.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::api_db::ApiEntry;
    use crate::detect::MatchKind;
    use crate::text::{preprocess_thread, RawPost, RawThread};

    const PAPER_SNIPPET: &str = "import com.fasterxml.jackson.databind.*\nprivate void tryConvert(String jsonStr) {\n    ObjectMapper mapper = new ObjectMapper();  \n    Wrapper wrapper = mapper.readValue(...);}";

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn paper_snippet() {
        let s = parse_snippet(PAPER_SNIPPET);
        assert_eq!(s.status, SnippetStatus::ValidJavaLike);
        assert_eq!(s.imports, ["com.fasterxml.jackson.databind.*"]);
        assert_eq!(s.used_types, set(&["ObjectMapper", "String", "Wrapper"]));
        assert!(s.declared_types.is_empty());
    }

    #[test]
    fn capitalized_class_declaration() {
        let s = parse_snippet("public Class Wrapper { }");
        assert_eq!(s.status, SnippetStatus::ValidJavaLike);
        assert_eq!(s.declared_types, set(&["Wrapper"]));
        assert!(s.used_types.is_empty());
    }

    #[test]
    fn xml_is_malformed() {
        let s = parse_snippet("<dependency>\n  <groupId>com.fasterxml</groupId>\n</dependency>");
        assert_eq!(s.status, SnippetStatus::DiscardedMalformed);
        let escaped = parse_snippet("&lt;bean id=\"x\"/&gt;\nFoo f = new Foo();");
        assert_eq!(escaped.status, SnippetStatus::DiscardedMalformed);
        assert!(escaped.used_types.is_empty());
    }

    #[test]
    fn other_ecosystems_discarded() {
        for src in [
            "using System;\nvar x = new JsonSerializer();",
            "def parse(s):\n    return json.loads(s)",
            "#include <stdio.h>\nint main() { return 0; }",
            "Console.WriteLine(\"hi\");",
        ] {
            assert_eq!(
                parse_snippet(src).status,
                SnippetStatus::DiscardedNonJava,
                "{src}"
            );
        }
    }

    #[test]
    fn unbalanced_is_malformed() {
        assert_eq!(
            parse_snippet("Foo f = new Foo(;\n}").status,
            SnippetStatus::DiscardedMalformed
        );
        // delimiters inside strings and comments do not count
        let ok = parse_snippet("String s = \"(\"; // }\nFoo f = null;");
        assert_eq!(ok.status, SnippetStatus::ValidJavaLike);
        assert_eq!(ok.used_types, set(&["Foo", "String"]));
    }

    #[test]
    fn qualified_usage_and_imports() {
        let s = parse_snippet(
            "import java.util.List;\nimport static org.junit.Assert.*;\ncom.fasterxml.jackson.databind.ObjectMapper m = null;\nList<JsonNode> nodes = Collections.emptyList();",
        );
        assert_eq!(s.imports, ["java.util.List"]);
        assert_eq!(
            s.used_types,
            set(&[
                "Collections",
                "JsonNode",
                "List",
                "com.fasterxml.jackson.databind.ObjectMapper"
            ])
        );
    }

    fn thread(bodies: &[&str]) -> ThreadDoc {
        preprocess_thread(&RawThread {
            thread_id: "t".into(),
            title: String::new(),
            posts: bodies
                .iter()
                .enumerate()
                .map(|(i, b)| RawPost {
                    id: format!("p{i}"),
                    body: b.to_string(),
                })
                .collect(),
        })
        .unwrap()
    }

    fn mention(post: &str, si: usize, start: usize, len: usize) -> Mention {
        Mention {
            thread_id: "t".into(),
            post_id: post.into(),
            sentence_index: si,
            start,
            end: start + len,
            surface: String::new(),
        }
    }

    #[test]
    fn single_mention_gets_all_types_minus_declared() {
        let body = format!(
            "I use Jackson here.<pre><code>{PAPER_SNIPPET}</code></pre>Later on.<pre><code>public Class Wrapper {{ }}</code></pre>"
        );
        let doc = thread(&[&body]);
        let m = mention("p0", 0, 2, 1);
        let ctx = extract_code_context(&doc, &[m], &CodeConfig::default());
        assert_eq!(ctx[0].types, set(&["ObjectMapper"]));
        let keep = CodeConfig {
            filter_java_lang: false,
        };
        let ctx = extract_code_context(&doc, &[mention("p0", 0, 2, 1)], &keep);
        assert_eq!(ctx[0].types, set(&["ObjectMapper", "String"]));
    }

    #[test]
    fn nearest_mention_assignment() {
        // M1 ... T1 ... M2 ... T2 across three sentences
        let doc = thread(&["Jackson is fine. Use ObjectMapper there. Gson has JsonParser too."]);
        let m1 = mention("p0", 0, 0, 1);
        let m2 = mention("p0", 2, 0, 1);
        let ctx = extract_code_context(&doc, &[m1, m2], &CodeConfig::default());
        assert_eq!(ctx[0].types, set(&["ObjectMapper"]));
        assert_eq!(ctx[1].types, set(&["JsonParser"]));
    }

    #[test]
    fn same_sentence_distance_and_tie() {
        // Gson ObjectMapper Jackson: equidistant, goes to the preceding mention
        let doc = thread(&["Gson ObjectMapper Jackson JsonParser x y Moshi."]);
        let ms = [
            mention("p0", 0, 0, 1),
            mention("p0", 0, 2, 1),
            mention("p0", 0, 6, 1),
        ];
        let ctx = extract_code_context(&doc, &ms, &CodeConfig::default());
        assert_eq!(ctx[0].types, set(&["ObjectMapper"]));
        assert_eq!(ctx[1].types, set(&["JsonParser"]));
        assert!(ctx[2].types.is_empty());
    }

    #[test]
    fn post_without_mentions_contributes_nothing() {
        let doc = thread(&["Use ObjectMapper.", "Jackson rocks."]);
        let ctx = extract_code_context(&doc, &[mention("p1", 0, 0, 1)], &CodeConfig::default());
        assert!(ctx[0].types.is_empty());
    }

    fn api(id: &str, types: &[&str]) -> ApiEntry {
        ApiEntry {
            id: id.into(),
            name: id.into(),
            modules: vec![],
            resource_links: vec![],
            portal_description: String::new(),
            homepage_description: String::new(),
            license_org: String::new(),
            dependencies: vec![],
            usage_count: 0,
            download_count: 0,
            type_index: types.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn cand(id: &str) -> Candidate {
        Candidate {
            api_id: id.into(),
            matched_module: None,
            match_kind: MatchKind::TokenSort,
            name_sim: 0.5,
        }
    }

    fn linking_db() -> ApiDatabase {
        ApiDatabase::from_entries(vec![
            api(
                "jackson.core",
                &["com.fasterxml.jackson.databind.ObjectMapper"],
            ),
            api("jackson-legacy", &["org.codehaus.jackson.map.ObjectMapper"]),
        ])
        .unwrap()
    }

    #[test]
    fn fqn_links_exactly() {
        let db = linking_db();
        let cands = [cand("jackson.core"), cand("jackson-legacy")];
        let got = link_type(
            &cands,
            "com.fasterxml.jackson.databind.ObjectMapper",
            &[],
            &db,
        );
        assert_eq!(got, set(&["jackson.core"]));
    }

    #[test]
    fn import_confirms_unqualified() {
        let db = linking_db();
        let cands = [cand("jackson.core"), cand("jackson-legacy")];
        let snippet = parse_snippet(PAPER_SNIPPET);
        let got = link_type(&cands, "ObjectMapper", std::slice::from_ref(&snippet), &db);
        assert_eq!(got, set(&["jackson.core"]));
        let single =
            parse_snippet("import org.codehaus.jackson.map.ObjectMapper;\nObjectMapper m;");
        assert_eq!(
            link_type(&cands, "ObjectMapper", &[single], &db),
            set(&["jackson-legacy"])
        );
    }

    #[test]
    fn no_imports_links_all() {
        let db = linking_db();
        let cands = [cand("jackson.core"), cand("jackson-legacy")];
        let got = link_type(&cands, "ObjectMapper", &[], &db);
        assert_eq!(got, set(&["jackson-legacy", "jackson.core"]));
        assert!(link_type(&cands, "Gson", &[], &db).is_empty());
    }

    #[test]
    fn structural_examples() {
        let empty = CodeContext::default();
        assert_eq!(structural_similarity(&empty, "a", &BTreeMap::new()), 0.0);
        let ctx = CodeContext {
            types: set(&["A", "B"]),
        };
        let mut links = BTreeMap::new();
        links.insert("A".to_string(), set(&["x"]));
        links.insert("B".to_string(), set(&["y"]));
        assert_eq!(structural_similarity(&ctx, "x", &links), 0.5);
        assert_eq!(structural_similarity(&ctx, "z", &links), 0.0);
    }
}
