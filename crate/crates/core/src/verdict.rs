//! Verdict extraction from comment text, spark labeling and blame labels.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};

use crate::corpus::{extract_quotes, Comment};
use crate::error::{Error, Result};
use crate::instance::{EventTriple, Instance};
use crate::text::jaccard;

pub const DEFAULT_PATTERNS: &str = include_str!("../data/verdict_patterns.json");
pub const DEFAULT_MATCH_THRESHOLD: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "YTA")]
    Yta,
    #[serde(rename = "NTA")]
    Nta,
    #[serde(rename = "ESH")]
    Esh,
    #[serde(rename = "NAH")]
    Nah,
    #[serde(rename = "INFO")]
    Info,
}

impl Verdict {
    pub const ALL: [Verdict; 5] = [Verdict::Yta, Verdict::Nta, Verdict::Esh, Verdict::Nah, Verdict::Info];

    pub fn code(self) -> &'static str {
        match self {
            Verdict::Yta => "YTA",
            Verdict::Nta => "NTA",
            Verdict::Esh => "ESH",
            Verdict::Nah => "NAH",
            Verdict::Info => "INFO",
        }
    }

    /// Swaps YTA and NTA; other codes are returned unchanged.
    pub fn flip(self) -> Verdict {
        match self {
            Verdict::Yta => Verdict::Nta,
            Verdict::Nta => Verdict::Yta,
            v => v,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Verdict::ALL
            .into_iter()
            .find(|v| v.code().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown verdict code '{s}'")))
    }
}

/// On-disk shape of the verdict pattern file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatternConfig {
    pub patterns: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub negation_cues: Vec<String>,
    #[serde(default)]
    pub transition_words: Vec<String>,
    #[serde(default = "default_window")]
    pub negation_window: usize,
}

fn default_window() -> usize {
    5
}

impl PatternConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl Default for PatternConfig {
    fn default() -> Self {
        PatternConfig::from_json(DEFAULT_PATTERNS).expect("bundled verdict patterns parse")
    }
}

#[derive(Debug, Clone)]
pub struct VerdictExtractor {
    patterns: Vec<(Verdict, Regex)>,
    negation_cues: Vec<String>,
    transitions: Vec<Regex>,
    window: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Hit {
    start: usize,
    end: usize,
    code: Verdict,
}

fn word_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[\p{L}\p{N}]+(?:['’][\p{L}]+)*").unwrap())
}

// Commas, colons and sentence punctuation end the clause a negation cue can
// reach: "Not gonna lie, YTA" is not a negated verdict.
const CLAUSE_BREAKS: &[char] = &['.', '!', '?', ';', ',', ':', '\n'];

impl VerdictExtractor {
    pub fn new(config: &PatternConfig) -> Result<Self> {
        let mut patterns = Vec::new();
        for (code, list) in &config.patterns {
            let verdict: Verdict = code.parse()?;
            for p in list {
                let re = RegexBuilder::new(p)
                    .case_insensitive(true)
                    .build()
                    .map_err(|e| Error::Config(format!("bad verdict pattern '{p}': {e}")))?;
                patterns.push((verdict, re));
            }
        }
        let transitions = config
            .transition_words
            .iter()
            .map(|w| {
                RegexBuilder::new(&format!(r"\b{}\b", regex::escape(w)))
                    .case_insensitive(true)
                    .build()
                    .map_err(|e| Error::Config(format!("bad transition word '{w}': {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(VerdictExtractor {
            patterns,
            negation_cues: config.negation_cues.iter().map(|c| c.to_lowercase()).collect(),
            transitions,
            window: config.negation_window,
        })
    }

    pub fn extract(&self, comment_text: &str) -> Option<Verdict> {
        let hits = self.hits(comment_text);
        let chosen = self.choose(comment_text, &hits)?;
        if self.negated(comment_text, chosen.start) {
            Some(chosen.code.flip())
        } else {
            Some(chosen.code)
        }
    }

    /// Non-overlapping matches in text order; of overlapping matches the
    /// longer one survives ("not the a-hole" over a bare code inside it).
    fn hits(&self, text: &str) -> Vec<Hit> {
        let mut all: Vec<Hit> = self
            .patterns
            .iter()
            .flat_map(|(code, re)| re.find_iter(text).map(move |m| Hit { start: m.start(), end: m.end(), code: *code }))
            .collect();
        all.sort_by(|a, b| a.start.cmp(&b.start).then((b.end - b.start).cmp(&(a.end - a.start))));
        let mut out: Vec<Hit> = Vec::new();
        for h in all {
            match out.last_mut() {
                Some(last) if h.start < last.end => {
                    if h.end - h.start > last.end - last.start {
                        *last = h;
                    }
                }
                _ => out.push(h),
            }
        }
        out
    }

    fn choose(&self, text: &str, hits: &[Hit]) -> Option<Hit> {
        let first = *hits.first()?;
        if hits.len() == 1 {
            return Some(first);
        }
        let mut positions: Vec<usize> =
            self.transitions.iter().flat_map(|re| re.find_iter(text).map(|m| m.end())).collect();
        positions.sort_unstable();
        for pos in positions.into_iter().rev() {
            if let Some(h) = hits.iter().find(|h| h.start >= pos) {
                return Some(*h);
            }
        }
        Some(first)
    }

    fn negated(&self, text: &str, start: usize) -> bool {
        if self.negation_cues.is_empty() || self.window == 0 {
            return false;
        }
        let before = &text[..start];
        let clause_start = before.rfind(CLAUSE_BREAKS).map(|i| i + 1).unwrap_or(0);
        let clause = &before[clause_start..];
        let words: Vec<String> = word_re().find_iter(clause).map(|m| m.as_str().to_lowercase().replace('’', "'")).collect();
        let from = words.len().saturating_sub(self.window);
        words[from..].iter().any(|w| self.is_cue(w))
    }

    fn is_cue(&self, word: &str) -> bool {
        self.negation_cues.iter().any(|c| c == word || (c == "n't" && word.ends_with("n't")))
    }
}

impl Default for VerdictExtractor {
    fn default() -> Self {
        VerdictExtractor::new(&PatternConfig::default()).expect("bundled verdict patterns compile")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparkLabel {
    pub instance_id: String,
    pub is_spark: bool,
    pub quoting_comment_ids: Vec<String>,
}

/// A quote excerpt (or sentence of one) that matched no instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnmatchedQuote {
    pub comment_id: String,
    pub post_id: String,
    pub excerpt: String,
    pub best_overlap: f64,
}

fn quote_sentences(excerpt: &str) -> Vec<String> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r#"[.!?]+["')\]]*\s+"#).unwrap());
    let mut out = Vec::new();
    let mut last = 0;
    for m in re.find_iter(excerpt) {
        out.push(excerpt[last..m.end()].trim().to_string());
        last = m.end();
    }
    out.push(excerpt[last..].trim().to_string());
    out.retain(|s| !s.is_empty());
    out
}

/// Marks every instance quoted by at least one comment.
///
/// Each quote excerpt is split into sentences and every sentence is matched
/// to the instance of the same post with the highest token-set Jaccard
/// overlap (first instance wins ties); matches below `match_threshold` are
/// returned as unmatched and flip nothing.
pub fn label_sparks(
    instances: &[Instance],
    quoting_comments: &[Comment],
    match_threshold: f64,
) -> (Vec<SparkLabel>, Vec<UnmatchedQuote>) {
    let mut by_post: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, inst) in instances.iter().enumerate() {
        by_post.entry(inst.post_id.as_str()).or_default().push(i);
    }
    let mut quoted: Vec<Vec<String>> = vec![Vec::new(); instances.len()];
    let mut unmatched = Vec::new();
    for comment in quoting_comments {
        let post_id = comment.post_id();
        let candidates = by_post.get(post_id).map(Vec::as_slice).unwrap_or(&[]);
        for excerpt in extract_quotes(&comment.body) {
            for piece in quote_sentences(&excerpt) {
                let mut best: Option<(usize, f64)> = None;
                for &i in candidates {
                    let o = jaccard(&piece, &instances[i].raw_text);
                    if best.map_or(true, |(_, b)| o > b) {
                        best = Some((i, o));
                    }
                }
                match best {
                    Some((i, o)) if o >= match_threshold => {
                        if !quoted[i].contains(&comment.id) {
                            quoted[i].push(comment.id.clone());
                        }
                    }
                    _ => {
                        let best_overlap = best.map_or(0.0, |(_, o)| o);
                        log::debug!("unmatched quote in comment {} (best overlap {best_overlap:.3})", comment.id);
                        unmatched.push(UnmatchedQuote {
                            comment_id: comment.id.clone(),
                            post_id: post_id.to_string(),
                            excerpt: piece,
                            best_overlap,
                        });
                    }
                }
            }
        }
    }
    let labels = instances
        .iter()
        .zip(quoted)
        .map(|(inst, ids)| SparkLabel { instance_id: inst.id.clone(), is_spark: !ids.is_empty(), quoting_comment_ids: ids })
        .collect();
    (labels, unmatched)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlameLabel {
    pub instance_id: String,
    pub comment_id: String,
    pub subject_is_author: bool,
    pub verdict: Verdict,
    pub blameworthy: u8,
}

/// The blame rule: an author-subject spark judged NTA, or a non-author
/// subject judged YTA, is not blameworthy. Absent for ESH/NAH/INFO.
pub fn blameworthy(subject_is_author: bool, verdict: Verdict) -> Option<u8> {
    match verdict {
        Verdict::Nta => Some(if subject_is_author { 0 } else { 1 }),
        Verdict::Yta => Some(if subject_is_author { 1 } else { 0 }),
        _ => None,
    }
}

/// Blame label for one (spark, comment) pair.
pub fn label_blame(spark: &Instance, triple: &EventTriple, verdict: Verdict, comment_id: &str) -> Option<BlameLabel> {
    let Some(subject_is_author) = triple.subject_is_author() else {
        log::debug!("spark {} has no triple subject; no blame label", spark.id);
        return None;
    };
    let blameworthy = blameworthy(subject_is_author, verdict)?;
    Some(BlameLabel {
        instance_id: spark.id.clone(),
        comment_id: comment_id.to_string(),
        subject_is_author,
        verdict,
        blameworthy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ex(s: &str) -> Option<Verdict> {
        VerdictExtractor::default().extract(s)
    }

    #[test]
    fn documented_examples() {
        assert_eq!(ex("not the a-hole, she overreacted"), Some(Verdict::Nta));
        assert_eq!(ex("YTA at first glance but honestly NTA"), Some(Verdict::Nta));
        assert_eq!(ex("I do not think YTA"), Some(Verdict::Nta));
        assert_eq!(ex("great story, thanks"), None);
    }

    #[test]
    fn negation_does_not_cross_clauses() {
        assert_eq!(ex("Not gonna lie, YTA"), Some(Verdict::Yta));
        assert_eq!(ex("I don't think YTA here"), Some(Verdict::Nta));
        assert_eq!(ex("I never said this. YTA"), Some(Verdict::Yta));
        assert_eq!(ex("not one bit of this is fine and YTA"), Some(Verdict::Yta));
    }

    #[test]
    fn negation_leaves_other_codes() {
        assert_eq!(ex("I do not think ESH"), Some(Verdict::Esh));
    }

    #[test]
    fn empty_cue_list_disables_reversal() {
        let mut cfg = PatternConfig::default();
        cfg.negation_cues.clear();
        let e = VerdictExtractor::new(&cfg).unwrap();
        assert_eq!(e.extract("I do not think YTA"), Some(Verdict::Yta));
    }

    #[test]
    fn overlapping_phrase_wins() {
        assert_eq!(ex("You're not the asshole here"), Some(Verdict::Nta));
        assert_eq!(ex("YWNBTA"), Some(Verdict::Nta));
        assert_eq!(ex("you are the asshole"), Some(Verdict::Yta));
    }

    #[test]
    fn bad_pattern_is_config_error() {
        let mut cfg = PatternConfig::default();
        cfg.patterns.insert("YTA".into(), vec!["(".into()]);
        assert!(matches!(VerdictExtractor::new(&cfg), Err(Error::Config(_))));
        cfg.patterns.insert("XYZ".into(), vec!["x".into()]);
        assert!(VerdictExtractor::new(&cfg).is_err());
    }

    #[test]
    fn blame_rule() {
        assert_eq!(blameworthy(true, Verdict::Nta), Some(0));
        assert_eq!(blameworthy(false, Verdict::Nta), Some(1));
        assert_eq!(blameworthy(true, Verdict::Yta), Some(1));
        assert_eq!(blameworthy(false, Verdict::Yta), Some(0));
        assert_eq!(blameworthy(true, Verdict::Esh), None);
        assert_eq!(blameworthy(false, Verdict::Info), None);
    }

    #[test]
    fn splits_quote_sentences() {
        assert_eq!(quote_sentences("She left. I stayed!"), vec!["She left.", "I stayed!"]);
        assert_eq!(quote_sentences("one piece"), vec!["one piece"]);
    }

    proptest! {
        #[test]
        fn single_code_is_returned(
            code in prop::sample::select(Verdict::ALL.to_vec()),
            pre in prop::sample::select(vec!["", "honestly", "I think", "Clear case:", "wow"]),
            post in prop::sample::select(vec!["", "she was rude", "for sure", "good luck"]),
        ) {
            let text = format!("{pre} {} {post}", code.code());
            prop_assert_eq!(ex(&text), Some(code));
        }

        #[test]
        fn blame_symmetry(author in any::<bool>(), v in prop::sample::select(vec![Verdict::Yta, Verdict::Nta])) {
            prop_assert_eq!(blameworthy(author, v), blameworthy(!author, v.flip()));
        }

        #[test]
        fn extraction_is_total(s in "\\PC{0,80}") {
            let e = VerdictExtractor::default();
            prop_assert_eq!(e.extract(&s), e.extract(&s));
        }
    }
}
