#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use apilink::api_db::{ApiDatabase, ApiEntry};
use apilink::classifier::{FeatureVector, Label, NBModel, TrainingExample, NUM_FEATURES};
use apilink::pipeline::{render_html, render_records, to_records, PipelineConfig, Resolver};
use apilink::text::{preprocess_thread, RawPost, RawThread, ThreadDoc};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture(rel: &str) -> PathBuf {
    fixtures().join(rel)
}

pub fn paper_db() -> ApiDatabase {
    ApiDatabase::load(&fixture("db/paper.jsonl")).unwrap()
}

pub fn extended_db() -> ApiDatabase {
    ApiDatabase::load(&fixture("db/extended.jsonl")).unwrap()
}

pub fn model() -> NBModel {
    NBModel::load(fixture("model.json")).unwrap()
}

pub fn thread_files(dir: &str) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(fixture(dir))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    files
}

pub fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Records output for every thread in a fixture directory, in file order.
pub fn records_for_dir(db: &ApiDatabase, model: &NBModel, dir: &str) -> String {
    let resolver = Resolver::new(db, model, PipelineConfig::default()).unwrap();
    let mut out = String::new();
    for doc in apilink::text::load_threads(&fixture(dir)).unwrap() {
        let decisions = resolver.resolve_thread(&doc).unwrap();
        out.push_str(&render_records(&to_records(&decisions, db)));
    }
    out
}

pub fn html_for_dir(db: &ApiDatabase, model: &NBModel, dir: &str) -> BTreeMap<String, String> {
    let resolver = Resolver::new(db, model, PipelineConfig::default()).unwrap();
    apilink::text::load_threads(&fixture(dir))
        .unwrap()
        .into_iter()
        .map(|doc| {
            let records = to_records(&resolver.resolve_thread(&doc).unwrap(), db);
            (doc.thread_id.clone(), render_html(&records, &doc).unwrap())
        })
        .collect()
}

/// "a/b" or "a" into a float.
pub fn fraction(s: &str) -> f64 {
    match s.split_once('/') {
        Some((n, d)) => n.parse::<f64>().unwrap() / d.parse::<f64>().unwrap(),
        None => s.parse().unwrap(),
    }
}

// ---- expected outcomes -------------------------------------------------

pub struct Expected {
    pub thread: &'static str,
    pub surface: &'static str,
    pub api: Option<&'static str>,
    pub module: Option<&'static str>,
    pub provenance: &'static str,
}

pub const SCENARIOS: [Expected; 6] = [
    Expected {
        thread: "sc-centrality",
        surface: "Jackson",
        api: Some("jackson.core"),
        module: None,
        provenance: "INTRINSIC:centrality",
    },
    Expected {
        thread: "sc-betweenness",
        surface: "Easy Gson",
        api: Some("easy-gson"),
        module: None,
        provenance: "INTRINSIC:betweenness",
    },
    Expected {
        thread: "sc-composition",
        surface: "Jackson",
        api: Some("apache-camel"),
        module: Some("camel-jackson"),
        provenance: "EXTRINSIC:composition",
    },
    Expected {
        thread: "sc-aggregation",
        surface: "Jackson",
        api: Some("jackson.core"),
        module: None,
        provenance: "EXTRINSIC:aggregation",
    },
    Expected {
        thread: "sc-projection",
        surface: "Jackson",
        api: Some("jackson.datatype"),
        module: None,
        provenance: "EXTRINSIC:projection",
    },
    Expected {
        thread: "sc-import",
        surface: "Jackson",
        api: Some("jackson.core"),
        module: None,
        provenance: "CLASSIFIER_SINGLE_HIT",
    },
];

pub const AMBIGUITY: [Expected; 8] = [
    Expected {
        thread: "amb-1-homonymy",
        surface: "Hibernate",
        api: Some("hibernate-validator"),
        module: None,
        provenance: "FALLBACK",
    },
    Expected {
        thread: "amb-2-meronymy",
        surface: "SWT",
        api: Some("eclipse"),
        module: Some("SWT"),
        provenance: "CLASSIFIER_SINGLE_HIT",
    },
    Expected {
        thread: "amb-3-synonymy",
        surface: "Joda",
        api: Some("joda-time"),
        module: None,
        provenance: "CLASSIFIER_SINGLE_HIT",
    },
    Expected {
        thread: "amb-3-synonymy",
        surface: "Joda-Time",
        api: Some("joda-time"),
        module: None,
        provenance: "CLASSIFIER_SINGLE_HIT",
    },
    Expected {
        thread: "amb-4-holonymy",
        surface: "Jackson",
        api: Some("apache-camel"),
        module: Some("camel-jackson"),
        provenance: "EXTRINSIC:composition",
    },
    Expected {
        thread: "amb-5-hypernymy",
        surface: "jackson",
        api: Some("jackson.core"),
        module: None,
        provenance: "CLASSIFIER_SINGLE_HIT",
    },
    Expected {
        thread: "amb-6-spuriousness",
        surface: "Jackson",
        api: None,
        module: None,
        provenance: "CLASSIFIER_NO_HIT",
    },
    Expected {
        thread: "fig-1",
        surface: "Jackson",
        api: Some("jackson.core"),
        module: None,
        provenance: "CLASSIFIER_SINGLE_HIT",
    },
];

/// Checks every decision of `thread` whose surface is `e.surface`.
pub fn check_expected(
    db: &ApiDatabase,
    model: &NBModel,
    dir: &str,
    e: &Expected,
) -> Result<(), String> {
    let doc = apilink::text::load_thread(&fixture(&format!("{dir}/{}.json", e.thread)))
        .map_err(|err| err.to_string())?;
    let resolver =
        Resolver::new(db, model, PipelineConfig::default()).map_err(|err| err.to_string())?;
    let decisions = resolver
        .resolve_thread(&doc)
        .map_err(|err| err.to_string())?;
    let matching: Vec<_> = decisions
        .iter()
        .filter(|d| d.mention.surface == e.surface && !d.mention.in_title())
        .collect();
    if matching.is_empty() {
        return Err(format!("{}: no mention `{}`", e.thread, e.surface));
    }
    // fig-1 also holds a person named Jackson; only the first mention is the library
    let matching = if e.thread == "fig-1" {
        &matching[..1]
    } else {
        &matching[..]
    };
    for d in matching {
        let module = match &d.outcome {
            apilink::pipeline::Outcome::Api { module, .. } => module.as_deref(),
            apilink::pipeline::Outcome::FalseMention => None,
        };
        let got = (d.outcome.api_id(), module, d.provenance.to_string());
        let want = (e.api, e.module, e.provenance.to_string());
        if got != want {
            return Err(format!(
                "{} `{}` at {}/{}: got {got:?}, want {want:?}",
                e.thread, e.surface, d.mention.post_id, d.mention.sentence_index
            ));
        }
    }
    Ok(())
}

// ---- link_type oracle --------------------------------------------------

const PACKAGES: [&str; 5] = [
    "com.acme.json",
    "com.acme.xml",
    "org.util",
    "net.fast.io2",
    "org.util.extra",
];
const SIMPLE: [&str; 6] = ["Mapper", "Parser", "Node", "Reader", "Writer", "Factory"];

pub struct LinkInstance {
    pub db: ApiDatabase,
    pub candidates: Vec<apilink::detect::Candidate>,
    pub type_name: String,
    pub import_lines: Vec<String>,
    pub snippet: String,
}

pub fn random_link_instance(rng: &mut ChaCha8Rng) -> LinkInstance {
    let n = rng.gen_range(1..=5);
    let mut entries = Vec::new();
    for i in 0..n {
        let k = rng.gen_range(0..=10);
        let mut types = BTreeSet::new();
        for _ in 0..k {
            types.insert(format!(
                "{}.{}",
                PACKAGES.choose(rng).unwrap(),
                SIMPLE.choose(rng).unwrap()
            ));
        }
        entries.push(ApiEntry {
            id: format!("c{i}"),
            name: format!("lib{i}"),
            modules: vec![],
            resource_links: vec![],
            portal_description: String::new(),
            homepage_description: String::new(),
            license_org: String::new(),
            dependencies: vec![],
            usage_count: 0,
            download_count: 0,
            type_index: types.into_iter().collect(),
        });
    }
    let simple = *SIMPLE.choose(rng).unwrap();
    let type_name = if rng.gen_bool(0.3) {
        format!("{}.{simple}", PACKAGES.choose(rng).unwrap())
    } else {
        simple.to_string()
    };
    let mut import_lines = Vec::new();
    for _ in 0..rng.gen_range(0..=4) {
        let pkg = PACKAGES.choose(rng).unwrap();
        let path = if rng.gen_bool(0.5) {
            format!("{pkg}.*")
        } else {
            format!("{pkg}.{}", SIMPLE.choose(rng).unwrap())
        };
        let semi = if rng.gen_bool(0.8) { ";" } else { "" };
        import_lines.push(format!("import {path}{semi}"));
    }
    let mut snippet = import_lines.join("\n");
    snippet.push_str("\nvalue = build(input);\n");
    let candidates = entries
        .iter()
        .map(|e| apilink::detect::Candidate {
            api_id: e.id.clone(),
            matched_module: None,
            match_kind: apilink::detect::MatchKind::Exact,
            name_sim: 1.0,
        })
        .collect();
    LinkInstance {
        db: ApiDatabase::from_entries(entries).unwrap(),
        candidates,
        type_name,
        import_lines,
        snippet,
    }
}

/// Enumerates every (import, type index entry) pair and compares the
/// concatenated path with the indexed name.
pub fn oracle_link_type(inst: &LinkInstance) -> BTreeSet<String> {
    let t = inst.type_name.as_str();
    let paths: Vec<String> = inst
        .import_lines
        .iter()
        .map(|l| {
            l.trim_start_matches("import")
                .trim()
                .trim_end_matches(';')
                .to_string()
        })
        .collect();
    let mut exact = BTreeSet::new();
    let mut loose = BTreeSet::new();
    let mut confirmed = BTreeSet::new();
    for e in inst.db.entries() {
        for fqn in &e.type_index {
            if fqn == t {
                exact.insert(e.id.clone());
                continue;
            }
            let last = fqn.rsplit('.').next().unwrap();
            if last != t {
                continue;
            }
            loose.insert(e.id.clone());
            for p in &paths {
                let joined = match p.strip_suffix('*') {
                    Some(prefix) => format!("{prefix}{t}"),
                    None if p.rsplit('.').next() == Some(t) => p.clone(),
                    None => continue,
                };
                if &joined == fqn {
                    confirmed.insert(e.id.clone());
                }
            }
        }
    }
    let linked: BTreeSet<String> = exact.union(&confirmed).cloned().collect();
    if linked.is_empty() {
        loose
    } else {
        linked
    }
}

// ---- graph fixtures ----------------------------------------------------

pub struct GraphFixture {
    pub db: ApiDatabase,
    pub adjacency: Vec<Vec<bool>>,
    pub mcl: apilink::detect::MentionCandidateList,
    pub in_mcl: Vec<bool>,
}

pub fn random_graph_fixture(rng: &mut ChaCha8Rng) -> GraphFixture {
    let n = rng.gen_range(2..=9);
    let mut adjacency = vec![vec![false; n]; n];
    let mut entries = Vec::new();
    for i in 0..n {
        let mut deps = Vec::new();
        for j in 0..n {
            if i != j && rng.gen_bool(0.3) {
                adjacency[i][j] = true;
                deps.push(format!("a{j}"));
            }
        }
        entries.push(ApiEntry {
            id: format!("a{i}"),
            name: format!("api{i}"),
            modules: vec![],
            resource_links: vec![],
            portal_description: String::new(),
            homepage_description: String::new(),
            license_org: String::new(),
            dependencies: deps,
            usage_count: 0,
            download_count: 0,
            type_index: vec![],
        });
    }
    let mut in_mcl = vec![false; n];
    let mut candidates = Vec::new();
    for (i, flag) in in_mcl.iter_mut().enumerate() {
        if rng.gen_bool(0.7) {
            *flag = true;
            candidates.push(apilink::detect::Candidate {
                api_id: format!("a{i}"),
                matched_module: None,
                match_kind: apilink::detect::MatchKind::TokenSort,
                name_sim: 0.5,
            });
        }
    }
    let mcl = apilink::detect::MentionCandidateList {
        mention: apilink::detect::Mention {
            thread_id: "g".into(),
            post_id: "p1".into(),
            sentence_index: 0,
            start: 0,
            end: 1,
            surface: "api".into(),
        },
        candidates,
    };
    GraphFixture {
        db: ApiDatabase::from_entries(entries).unwrap(),
        adjacency,
        mcl,
        in_mcl,
    }
}

// ---- classifier oracle -------------------------------------------------

/// Gaussian posterior of the positive class computed from scratch: sample
/// means, population variances with the same floor, and densities
/// multiplied in linear space.
pub struct PosteriorOracle {
    prior: [f64; 2],
    mean: [[f64; NUM_FEATURES]; 2],
    var: [[f64; NUM_FEATURES]; 2],
}

impl PosteriorOracle {
    pub fn fit(train: &[TrainingExample], floor: f64) -> Self {
        let mut prior = [0.0; 2];
        let mut mean = [[0.0; NUM_FEATURES]; 2];
        let mut var = [[0.0; NUM_FEATURES]; 2];
        for (k, label) in [Label::TrueApi, Label::FalseMention]
            .into_iter()
            .enumerate()
        {
            let rows: Vec<[f64; NUM_FEATURES]> = train
                .iter()
                .filter(|e| e.label == label)
                .map(|e| e.features.to_array())
                .collect();
            let n = rows.len() as f64;
            prior[k] = n / train.len() as f64;
            for j in 0..NUM_FEATURES {
                let m = rows.iter().map(|r| r[j]).sum::<f64>() / n;
                let v = rows.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n;
                mean[k][j] = m;
                var[k][j] = v.max(floor);
            }
        }
        PosteriorOracle { prior, mean, var }
    }

    pub fn posterior(&self, x: &FeatureVector) -> f64 {
        let x = x.to_array();
        let joint = |k: usize| {
            let mut p = self.prior[k];
            for j in 0..NUM_FEATURES {
                let v = self.var[k][j];
                p *= (-(x[j] - self.mean[k][j]).powi(2) / (2.0 * v)).exp()
                    / (2.0 * std::f64::consts::PI * v).sqrt();
            }
            p
        };
        let (t, f) = (joint(0), joint(1));
        t / (t + f)
    }
}

// ---- synthetic load ----------------------------------------------------

const WORDS: [&str; 40] = [
    "amber", "basalt", "cobalt", "delta", "ember", "fjord", "granite", "harbor", "indigo",
    "juniper", "kestrel", "lumen", "meadow", "nimbus", "onyx", "pylon", "quartz", "raven",
    "sierra", "tundra", "umbra", "vertex", "willow", "xenon", "yarrow", "zephyr", "aurora",
    "breeze", "cinder", "dune", "falcon", "glacier", "horizon", "iris", "jade", "krypton", "lotus",
    "mistral", "nova", "orchid",
];

const NOUNS: [&str; 12] = [
    "parser", "cache", "queue", "schema", "stream", "request", "client", "server", "buffer",
    "index", "template", "report",
];

fn camel(w: &str) -> String {
    let mut c = w.chars();
    c.next()
        .map(|f| f.to_ascii_uppercase().to_string() + c.as_str())
        .unwrap_or_default()
}

/// A database of `n` entries with two-word names, short descriptions,
/// type indexes and dependencies on earlier entries.
pub fn synthetic_db(n: usize, seed: u64) -> ApiDatabase {
    let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    let mut entries: Vec<ApiEntry> = Vec::new();
    let mut seen = BTreeSet::new();
    while entries.len() < n {
        let a = *WORDS.choose(&mut rng).unwrap();
        let b = *WORDS.choose(&mut rng).unwrap();
        if a == b || !seen.insert((a, b)) {
            continue;
        }
        let i = entries.len();
        let noun = NOUNS.choose(&mut rng).unwrap();
        let deps = (0..i)
            .filter(|_| rng.gen_bool(2.0 / (i as f64 + 2.0)))
            .take(2)
            .map(|j| entries[j].id.clone())
            .collect();
        entries.push(ApiEntry {
            id: format!("{a}-{b}"),
            name: format!("org.{a}.{b}"),
            modules: vec![],
            resource_links: vec![format!("https://{a}.example.org/{b}")],
            portal_description: format!(
                "{} {} is a {noun} library for Java. It reads each {noun} and writes the result to a stream.",
                camel(a),
                camel(b)
            ),
            homepage_description: String::new(),
            license_org: String::new(),
            dependencies: deps,
            usage_count: rng.gen_range(10..50_000),
            download_count: rng.gen_range(100..1_000_000),
            type_index: vec![
                format!("org.{a}.{b}.{}{}", camel(a), camel(noun)),
                format!("org.{a}.{b}.{}Builder", camel(b)),
            ],
        });
    }
    ApiDatabase::from_entries(entries).unwrap()
}

/// `posts` posts spread over threads of five, each naming entries of `db`.
pub fn synthetic_threads(db: &ApiDatabase, posts: usize, seed: u64) -> Vec<ThreadDoc> {
    let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    let entries = db.entries();
    let mut threads = Vec::new();
    let mut made = 0;
    while made < posts {
        let mut raw_posts = Vec::new();
        for p in 0..5.min(posts - made) {
            let mut body = String::new();
            for _ in 0..3 {
                let e = entries.choose(&mut rng).unwrap();
                let words: Vec<&str> = e.id.split('-').collect();
                let noun = NOUNS.choose(&mut rng).unwrap();
                body.push_str(&format!(
                    "I use {} {} to read the {noun} before the server writes the report. ",
                    camel(words[0]),
                    camel(words[1])
                ));
            }
            if rng.gen_bool(0.5) {
                let e = entries.choose(&mut rng).unwrap();
                let ty = e.type_index[0].rsplit('.').next().unwrap();
                body.push_str(&format!(
                    "<pre><code>{ty} reader = new {ty}();\nreader.open(input);</code></pre>"
                ));
            }
            raw_posts.push(RawPost {
                id: format!("p{}", p + 1),
                body,
            });
        }
        made += raw_posts.len();
        let raw = RawThread {
            thread_id: format!("load-{:03}", threads.len()),
            title: "Reading records from a queue".into(),
            posts: raw_posts,
        };
        threads.push(preprocess_thread(&raw).unwrap());
    }
    threads
}
