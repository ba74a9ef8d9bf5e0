//! Name tokenization shared by mention detection, description selection and
//! composition checks.

use std::collections::BTreeSet;
use std::sync::LazyLock;

use super::stopwords::is_stopword;

/// Leading package segments that carry no identifying information.
pub const PACKAGE_PREFIXES: [&str; 5] = ["com", "org", "net", "io", "www"];

static PREFIX_SET: LazyLock<BTreeSet<&'static str>> =
    LazyLock::new(|| PACKAGE_PREFIXES.iter().copied().collect());

/// Splits on every non-alphanumeric character and on lower-to-upper camel
/// boundaries, lowercases, and drops stopwords and package prefixes.
/// Order and duplicates are preserved.
pub fn name_token_sequence(name: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut prev_lower = false;
    for ch in name.chars() {
        if !ch.is_alphanumeric() {
            flush(&mut current, &mut out);
            prev_lower = false;
            continue;
        }
        if ch.is_uppercase() && prev_lower {
            flush(&mut current, &mut out);
        }
        prev_lower = ch.is_lowercase();
        current.extend(ch.to_lowercase());
    }
    flush(&mut current, &mut out);
    out
}

fn flush(current: &mut String, out: &mut Vec<String>) {
    if current.is_empty() {
        return;
    }
    let token = std::mem::take(current);
    if !is_stopword(&token) && !PREFIX_SET.contains(token.as_str()) {
        out.push(token);
    }
}

/// The token set of a name: [`name_token_sequence`] with duplicates collapsed.
pub fn tokenize_name(name: &str) -> BTreeSet<String> {
    name_token_sequence(name).into_iter().collect()
}

/// Jaccard index of two sets; empty over empty is 0.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}
