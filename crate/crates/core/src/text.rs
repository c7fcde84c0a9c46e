//! Shared tokenization helpers.
//!
//! Every "word count" in the toolkit goes through [`words`]: the text is split
//! on whitespace and tokens made only of punctuation or symbols are dropped.
//! Surrounding punctuation is trimmed from the surviving tokens.

/// Whitespace-split words with punctuation-only tokens removed and edge
/// punctuation trimmed. `"NTA. - she lied!"` yields `["NTA", "she", "lied"]`.
pub fn words(text: &str) -> Vec<&str> {
    text.split_whitespace()
        .map(|tok| tok.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|tok| !tok.is_empty())
        .collect()
}

pub fn word_count(text: &str) -> usize {
    words(text).len()
}

/// Lowercased runs of ASCII alphanumerics. Used for overlap and tf-idf
/// vocabularies, where `"___"` placeholders and punctuation carry no content.
pub fn alnum_tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_ascii_lowercase())
        .collect()
}

/// Jaccard overlap of the lowercased alphanumeric token sets of `a` and `b`.
/// Two texts without any tokens have overlap 0.
pub fn jaccard(a: &str, b: &str) -> f64 {
    use std::collections::BTreeSet;
    let a: BTreeSet<String> = alnum_tokens(a).into_iter().collect();
    let b: BTreeSet<String> = alnum_tokens(b).into_iter().collect();
    let union = a.union(&b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

/// Lemmas of the content words of `text`: alphanumeric tokens minus
/// stopwords and the PersonX/PersonY/PersonZ placeholders of event snippets.
pub fn content_lemmas(text: &str) -> Vec<String> {
    use std::sync::OnceLock;
    static STOP: OnceLock<crate::instance::Stopwords> = OnceLock::new();
    let stop = STOP.get_or_init(Default::default);
    alnum_tokens(text)
        .into_iter()
        .filter(|t| !stop.contains(t) && !crate::nlp::lexicon::PLACEHOLDERS.contains(&t.as_str()))
        .map(|t| crate::nlp::lexicon::lemma(&t))
        .collect()
}
