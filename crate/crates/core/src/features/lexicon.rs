//! Lexicon tables and their CSV loaders.
//!
//! File schemas (header row required):
//! - `moral.csv`: word,domain,score
//! - `vad.csv`: word,v,a,d
//! - `emotion.csv`: word,anger,fear,anticipation,trust,surprise,sadness,joy,disgust
//! - `categories.csv`: pattern,category (a trailing `*` makes a prefix pattern)
//! - `subjectivity.csv`: word,strength,polarity
//! - `connotation.csv`: verb,dim,slot,score
//! - `power_agency.csv`: verb,power_dir,agency
//! - `sentiment.csv`: word,valence (valence in [-4, 4])

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

pub const MORAL_DOMAINS: [&str; 5] = ["care", "fairness", "loyalty", "authority", "sanctity"];
pub const VAD_DIMS: [&str; 3] = ["valence", "arousal", "dominance"];
pub const EMOTIONS: [&str; 8] = ["anger", "fear", "anticipation", "trust", "surprise", "sadness", "joy", "disgust"];
pub const CONNOTATION_DIMS: [&str; 4] = ["perspective", "value", "effect", "mental_state"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Subject,
    Object,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerDir {
    ToSubject,
    ToObject,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Agency {
    High,
    Low,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryPattern {
    pub pattern: String,
    pub prefix: bool,
    pub category: String,
}

impl CategoryPattern {
    pub fn matches(&self, word: &str) -> bool {
        if self.prefix {
            word.starts_with(&self.pattern)
        } else {
            word == self.pattern
        }
    }
}

/// Immutable lexicon bundle shared by all feature computations.
#[derive(Debug, Clone, Default)]
pub struct LexiconSet {
    pub moral: HashMap<String, [f64; 5]>,
    pub vad: HashMap<String, [f64; 3]>,
    pub emotion: HashMap<String, [bool; 8]>,
    pub categories: Vec<CategoryPattern>,
    /// word -> (strength weight, polarity sign)
    pub subjectivity: HashMap<String, (f64, f64)>,
    /// verb -> dim -> [subject, object]
    pub connotation: HashMap<String, [[f64; 2]; 4]>,
    pub power_agency: HashMap<String, (PowerDir, Agency)>,
    pub sentiment: HashMap<String, f64>,
}

const BUNDLED: [(&str, &str); 8] = [
    ("moral.csv", include_str!("../../data/lexicons/moral.csv")),
    ("vad.csv", include_str!("../../data/lexicons/vad.csv")),
    ("emotion.csv", include_str!("../../data/lexicons/emotion.csv")),
    ("categories.csv", include_str!("../../data/lexicons/categories.csv")),
    ("subjectivity.csv", include_str!("../../data/lexicons/subjectivity.csv")),
    ("connotation.csv", include_str!("../../data/lexicons/connotation.csv")),
    ("power_agency.csv", include_str!("../../data/lexicons/power_agency.csv")),
    ("sentiment.csv", include_str!("../../data/lexicons/sentiment.csv")),
];

fn rows<T: for<'de> Deserialize<'de>>(name: &str, text: &str) -> Result<Vec<T>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    rdr.deserialize()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| Error::Csv(format!("{name} row {}: {e}", i + 2))))
        .collect()
}

fn bad(name: &str, msg: String) -> Error {
    Error::Csv(format!("{name}: {msg}"))
}

fn check_range(name: &str, word: &str, v: f64, lo: f64, hi: f64) -> Result<f64> {
    if !(lo..=hi).contains(&v) {
        return Err(bad(name, format!("score {v} for {word:?} outside [{lo}, {hi}]")));
    }
    Ok(v)
}

#[derive(Deserialize)]
struct MoralRow {
    word: String,
    domain: String,
    score: f64,
}

#[derive(Deserialize)]
struct VadRow {
    word: String,
    v: f64,
    a: f64,
    d: f64,
}

#[derive(Deserialize)]
struct EmotionRow {
    word: String,
    anger: u8,
    fear: u8,
    anticipation: u8,
    trust: u8,
    surprise: u8,
    sadness: u8,
    joy: u8,
    disgust: u8,
}

#[derive(Deserialize)]
struct CategoryRow {
    pattern: String,
    category: String,
}

#[derive(Deserialize)]
struct SubjectivityRow {
    word: String,
    strength: String,
    polarity: String,
}

#[derive(Deserialize)]
struct ConnotationRow {
    verb: String,
    dim: String,
    slot: String,
    score: f64,
}

#[derive(Deserialize)]
struct PowerRow {
    verb: String,
    power_dir: String,
    agency: String,
}

#[derive(Deserialize)]
struct SentimentRow {
    word: String,
    valence: f64,
}

impl LexiconSet {
    /// The small sample lexicons shipped with the crate.
    pub fn bundled() -> Self {
        let get = |n: &str| BUNDLED.iter().find(|(k, _)| *k == n).map(|(_, v)| *v).unwrap_or("");
        Self::from_sources(get).expect("bundled lexicons are valid")
    }

    /// Loads every schema file from `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let mut texts = HashMap::new();
        for (name, _) in BUNDLED {
            let p = dir.join(name);
            texts.insert(name, std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?);
        }
        Self::from_sources(|n| texts.get(n).map(String::as_str).unwrap_or(""))
    }

    fn from_sources<'a>(get: impl Fn(&str) -> &'a str) -> Result<Self> {
        let mut lex = LexiconSet::default();

        for r in rows::<MoralRow>("moral.csv", get("moral.csv"))? {
            let k = MORAL_DOMAINS
                .iter()
                .position(|d| *d == r.domain.to_lowercase())
                .ok_or_else(|| bad("moral.csv", format!("unknown domain {:?}", r.domain)))?;
            let s = check_range("moral.csv", &r.word, r.score, -1.0, 1.0)?;
            lex.moral.entry(r.word.to_lowercase()).or_default()[k] = s;
        }
        for r in rows::<VadRow>("vad.csv", get("vad.csv"))? {
            let v = [r.v, r.a, r.d];
            for x in v {
                check_range("vad.csv", &r.word, x, 0.0, 1.0)?;
            }
            lex.vad.insert(r.word.to_lowercase(), v);
        }
        for r in rows::<EmotionRow>("emotion.csv", get("emotion.csv"))? {
            let flags = [r.anger, r.fear, r.anticipation, r.trust, r.surprise, r.sadness, r.joy, r.disgust];
            if flags.iter().any(|&f| f > 1) {
                return Err(bad("emotion.csv", format!("non-binary flag for {:?}", r.word)));
            }
            lex.emotion.insert(r.word.to_lowercase(), flags.map(|f| f == 1));
        }
        for r in rows::<CategoryRow>("categories.csv", get("categories.csv"))? {
            let p = r.pattern.to_lowercase();
            let (pattern, prefix) = match p.strip_suffix('*') {
                Some(s) => (s.to_string(), true),
                None => (p, false),
            };
            lex.categories.push(CategoryPattern { pattern, prefix, category: r.category.to_lowercase() });
        }
        for r in rows::<SubjectivityRow>("subjectivity.csv", get("subjectivity.csv"))? {
            let strength = match r.strength.to_lowercase().as_str() {
                "strongsubj" | "strong" => 1.0,
                "weaksubj" | "weak" => 0.5,
                s => return Err(bad("subjectivity.csv", format!("unknown strength {s:?}"))),
            };
            let polarity = match r.polarity.to_lowercase().as_str() {
                "positive" => 1.0,
                "negative" => -1.0,
                "neutral" | "both" => 0.0,
                s => return Err(bad("subjectivity.csv", format!("unknown polarity {s:?}"))),
            };
            lex.subjectivity.insert(r.word.to_lowercase(), (strength, polarity));
        }
        for r in rows::<ConnotationRow>("connotation.csv", get("connotation.csv"))? {
            let d = CONNOTATION_DIMS
                .iter()
                .position(|d| *d == r.dim.to_lowercase())
                .ok_or_else(|| bad("connotation.csv", format!("unknown dim {:?}", r.dim)))?;
            let slot = match r.slot.to_lowercase().as_str() {
                "subject" => 0,
                "object" => 1,
                s => return Err(bad("connotation.csv", format!("unknown slot {s:?}"))),
            };
            let s = check_range("connotation.csv", &r.verb, r.score, -1.0, 1.0)?;
            lex.connotation.entry(r.verb.to_lowercase()).or_default()[d][slot] = s;
        }
        for r in rows::<PowerRow>("power_agency.csv", get("power_agency.csv"))? {
            let p = match r.power_dir.to_lowercase().as_str() {
                "to_subject" | "agent" => PowerDir::ToSubject,
                "to_object" | "theme" => PowerDir::ToObject,
                "none" | "" => PowerDir::None,
                s => return Err(bad("power_agency.csv", format!("unknown power_dir {s:?}"))),
            };
            let a = match r.agency.to_lowercase().as_str() {
                "high" | "pos" => Agency::High,
                "low" | "neg" => Agency::Low,
                "none" | "" => Agency::None,
                s => return Err(bad("power_agency.csv", format!("unknown agency {s:?}"))),
            };
            lex.power_agency.insert(r.verb.to_lowercase(), (p, a));
        }
        for r in rows::<SentimentRow>("sentiment.csv", get("sentiment.csv"))? {
            let v = check_range("sentiment.csv", &r.word, r.valence, -4.0, 4.0)?;
            lex.sentiment.insert(r.word.to_lowercase(), v);
        }
        Ok(lex)
    }

    /// Sorted category ids.
    pub fn category_names(&self) -> Vec<String> {
        self.categories.iter().map(|c| c.category.clone()).collect::<BTreeSet<_>>().into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_lexicons_load() {
        let lex = LexiconSet::bundled();
        assert!(lex.moral.len() >= 40);
        assert_eq!(lex.subjectivity["rude"], (1.0, -1.0));
        assert_eq!(lex.power_agency["fear"], (PowerDir::ToObject, Agency::Low));
        assert_eq!(lex.power_agency["push"], (PowerDir::ToSubject, Agency::High));
        assert!(lex.category_names().contains(&"swear".to_string()));
        assert!(lex.categories.iter().any(|c| c.prefix && c.matches("fucking")));
    }

    #[test]
    fn out_of_range_scores_are_rejected() {
        let texts = |n: &str| if n == "vad.csv" { "word,v,a,d\nx,1.5,0,0\n" } else { "" };
        assert!(matches!(LexiconSet::from_sources(texts), Err(Error::Csv(_))));
    }

    #[test]
    fn directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for (n, t) in BUNDLED {
            std::fs::write(dir.path().join(n), t).unwrap();
        }
        let lex = LexiconSet::load_dir(dir.path()).unwrap();
        assert_eq!(lex.vad, LexiconSet::bundled().vad);
        std::fs::remove_file(dir.path().join("vad.csv")).unwrap();
        assert!(matches!(LexiconSet::load_dir(dir.path()), Err(Error::Io { .. })));
    }
}
