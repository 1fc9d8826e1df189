//! Built-in English word lists. Both can be replaced from the config.

use std::collections::BTreeSet;

pub const DEFAULT_STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "also", "am", "an", "and", "any",
    "are", "as", "at", "be", "because", "been", "before", "being", "below", "between", "both",
    "but", "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few",
    "for", "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers",
    "herself", "him", "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its",
    "itself", "just", "me", "more", "most", "my", "myself", "no", "nor", "not", "now", "of",
    "off", "on", "once", "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own",
    "same", "she", "should", "so", "some", "such", "than", "that", "the", "their", "theirs",
    "them", "themselves", "then", "there", "these", "they", "this", "those", "through", "to",
    "too", "under", "until", "up", "very", "was", "we", "were", "what", "when", "where", "which",
    "while", "who", "whom", "why", "will", "with", "would", "you", "your", "yours", "yourself",
    "yourselves",
];

/// Lemmas never used as a relation by the verb-between-entities extractor.
/// `have` and `do` only count when they precede another verb.
pub const DEFAULT_AUXILIARIES: &[&str] = &[
    "be", "have", "do", "can", "could", "may", "might", "must", "shall", "should", "will",
    "would", "ought",
];

pub fn default_stopwords() -> BTreeSet<String> {
    DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect()
}

pub fn default_auxiliaries() -> BTreeSet<String> {
    DEFAULT_AUXILIARIES.iter().map(|s| s.to_string()).collect()
}

/// Third-person singular present of a verb lemma (`use` -> `uses`,
/// `apply` -> `applies`). Relation labels are kept in this form. For a
/// multi-word lemma only the first word is inflected.
pub fn third_person_singular(lemma: &str) -> String {
    let (verb, rest) = match lemma.split_once(' ') {
        Some((v, r)) => (v, Some(r)),
        None => (lemma, None),
    };
    let inflected = match verb {
        "be" => "is".to_owned(),
        "have" => "has".to_owned(),
        v if v.ends_with(['s', 'x', 'z', 'o']) || v.ends_with("ch") || v.ends_with("sh") => {
            format!("{v}es")
        }
        v if v.len() > 1
            && v.ends_with('y')
            && !v[..v.len() - 1].ends_with(['a', 'e', 'i', 'o', 'u']) =>
        {
            format!("{}ies", &v[..v.len() - 1])
        }
        v => format!("{v}s"),
    };
    match rest {
        Some(r) => format!("{inflected} {r}"),
        None => inflected,
    }
}
