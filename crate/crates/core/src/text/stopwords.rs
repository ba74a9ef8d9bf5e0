use std::collections::HashSet;
use std::sync::LazyLock;

static STOPWORDS: LazyLock<HashSet<&'static str>> = LazyLock::new(|| {
    include_str!("../../data/stopwords.txt")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
});

/// Case-sensitive lookup; callers pass lowercased tokens.
pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.contains(token)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn common_words() {
        assert!(is_stopword("the"));
        assert!(is_stopword("it"));
        assert!(!is_stopword("json"));
        assert!(!is_stopword("jackson"));
    }
}
