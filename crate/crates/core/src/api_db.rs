//! The API database: one JSON record per line, validated at load, plus the
//! dependency graph between entries.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleEntry {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homepage: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApiEntry {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub modules: Vec<ModuleEntry>,
    #[serde(default)]
    pub resource_links: Vec<String>,
    #[serde(default)]
    pub portal_description: String,
    #[serde(default)]
    pub homepage_description: String,
    #[serde(default)]
    pub license_org: String,
    #[serde(default)]
    pub dependencies: Vec<String>,
    #[serde(default)]
    pub usage_count: u64,
    #[serde(default)]
    pub download_count: u64,
    #[serde(default)]
    pub type_index: Vec<String>,
}

impl ApiEntry {
    pub fn module(&self, name: &str) -> Option<&ModuleEntry> {
        self.modules.iter().find(|m| m.name == name)
    }
}

/// Directed dependency edges; `a -> b` means `a` depends on `b`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DependencyGraph {
    out: BTreeMap<String, BTreeSet<String>>,
    incoming: BTreeMap<String, BTreeSet<String>>,
}

impl DependencyGraph {
    fn build(entries: &[ApiEntry]) -> Self {
        let mut graph = DependencyGraph::default();
        for e in entries {
            graph.out.entry(e.id.clone()).or_default();
            graph.incoming.entry(e.id.clone()).or_default();
        }
        for e in entries {
            for dep in &e.dependencies {
                graph.out.get_mut(&e.id).unwrap().insert(dep.clone());
                graph.incoming.get_mut(dep).unwrap().insert(e.id.clone());
            }
        }
        graph
    }

    pub fn node_count(&self) -> usize {
        self.out.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.values().map(BTreeSet::len).sum()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.out.keys().map(String::as_str)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.out.contains_key(id)
    }

    fn check(&self, id: &str) -> Result<()> {
        if self.contains(id) {
            Ok(())
        } else {
            Err(Error::UnknownApi(id.to_string()))
        }
    }

    /// Direct edge membership only.
    pub fn depends_on(&self, a: &str, b: &str) -> Result<bool> {
        self.check(b)?;
        let deps = self
            .out
            .get(a)
            .ok_or_else(|| Error::UnknownApi(a.to_string()))?;
        Ok(deps.contains(b))
    }

    /// `{x : x -> a}`
    pub fn dependents_of(&self, a: &str) -> Result<&BTreeSet<String>> {
        self.incoming
            .get(a)
            .ok_or_else(|| Error::UnknownApi(a.to_string()))
    }

    /// `{x : a -> x}`
    pub fn dependees_of(&self, a: &str) -> Result<&BTreeSet<String>> {
        self.out
            .get(a)
            .ok_or_else(|| Error::UnknownApi(a.to_string()))
    }

    /// Infallible edge test for ids already known to be in the graph.
    pub(crate) fn has_edge(&self, a: &str, b: &str) -> bool {
        self.out.get(a).is_some_and(|d| d.contains(b))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiDatabase {
    entries: Vec<ApiEntry>,
    index: HashMap<String, usize>,
    graph: DependencyGraph,
}

impl ApiDatabase {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_jsonl(&text, &path.display().to_string())
    }

    /// Parses line-delimited records. Blank lines and lines starting with
    /// `#` are skipped. Dependencies may point forward in the file.
    pub fn from_jsonl(text: &str, context: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let entry: ApiEntry =
                serde_json::from_str(trimmed).map_err(|e| Error::parse(context, i + 1, e))?;
            entries.push(entry);
        }
        Self::from_entries(entries)
    }

    pub fn from_entries(entries: Vec<ApiEntry>) -> Result<Self> {
        let mut index = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            validate_entry(e)?;
            if index.insert(e.id.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate id `{}`", e.id)));
            }
        }
        for e in &entries {
            for dep in &e.dependencies {
                if dep == &e.id {
                    return Err(Error::Validation(format!("`{}` depends on itself", e.id)));
                }
                if !index.contains_key(dep) {
                    return Err(Error::Validation(format!(
                        "`{}` depends on unknown id `{dep}`",
                        e.id
                    )));
                }
            }
        }
        let graph = DependencyGraph::build(&entries);
        Ok(ApiDatabase {
            entries,
            index,
            graph,
        })
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("entries serialize"));
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[ApiEntry] {
        &self.entries
    }

    pub fn get(&self, id: &str) -> Option<&ApiEntry> {
        self.index.get(id).map(|&i| &self.entries[i])
    }

    pub fn entry(&self, id: &str) -> Result<&ApiEntry> {
        self.get(id)
            .ok_or_else(|| Error::UnknownApi(id.to_string()))
    }

    pub fn graph(&self) -> &DependencyGraph {
        &self.graph
    }
}

fn validate_entry(e: &ApiEntry) -> Result<()> {
    if e.id.trim().is_empty() {
        return Err(Error::Validation("entry with empty id".into()));
    }
    if e.name.trim().is_empty() {
        return Err(Error::Validation(format!("`{}` has an empty name", e.id)));
    }
    let mut names = BTreeSet::new();
    for m in &e.modules {
        if m.name.trim().is_empty() {
            return Err(Error::Validation(format!(
                "`{}` has a module with no name",
                e.id
            )));
        }
        if !names.insert(m.name.as_str()) {
            return Err(Error::Validation(format!(
                "`{}` declares module `{}` twice",
                e.id, m.name
            )));
        }
    }
    if let Some(t) = e.type_index.iter().find(|t| !t.contains('.')) {
        return Err(Error::Validation(format!(
            "`{}` type index entry `{t}` is not fully qualified",
            e.id
        )));
    }
    Ok(())
}

fn host_of(url: &str) -> String {
    let rest = url.split_once("://").map_or(url, |(_, r)| r);
    let end = rest.find(['/', '?', '#', ':']).unwrap_or(rest.len());
    rest[..end].to_ascii_lowercase()
}

/// Groups links by host, takes the host with the most links (smallest host
/// name on ties) and returns that host's lexicographically smallest link.
pub fn select_homepage(links: &[String]) -> Option<&str> {
    let mut by_host: BTreeMap<String, Vec<&str>> = BTreeMap::new();
    for link in links {
        by_host.entry(host_of(link)).or_default().push(link);
    }
    // max_by_key keeps the last maximum; iterate in reverse so ties resolve
    // to the smallest host
    let (_, group) = by_host.iter().rev().max_by_key(|(_, g)| g.len())?;
    group.iter().min().copied()
}

pub fn api_homepage(entry: &ApiEntry) -> Result<String> {
    select_homepage(&entry.resource_links)
        .map(str::to_string)
        .ok_or_else(|| Error::NoHomepage(entry.id.clone()))
}

/// A module's explicit homepage, falling back to the owning API's links.
pub fn module_homepage(entry: &ApiEntry, module: &str) -> Result<String> {
    let m = entry
        .module(module)
        .ok_or_else(|| Error::UnknownApi(format!("{}/{module}", entry.id)))?;
    match &m.homepage {
        Some(h) => Ok(h.clone()),
        None => api_homepage(entry),
    }
}
