//! Compound sentiment scoring and its three-way category.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::text::words;

/// Strict thresholds: exactly ±0.05 is neutral.
pub const SENTIMENT_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentCategory {
    Negative,
    Neutral,
    Positive,
}

impl SentimentCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            SentimentCategory::Negative => "negative",
            SentimentCategory::Neutral => "neutral",
            SentimentCategory::Positive => "positive",
        }
    }
}

pub fn sentiment_category(compound: f64) -> SentimentCategory {
    sentiment_category_with(compound, SENTIMENT_THRESHOLD)
}

pub fn sentiment_category_with(compound: f64, threshold: f64) -> SentimentCategory {
    if compound < -threshold {
        SentimentCategory::Negative
    } else if compound > threshold {
        SentimentCategory::Positive
    } else {
        SentimentCategory::Neutral
    }
}

/// Any scorer producing a compound score in [-1, 1].
pub trait SentimentScorer: Sync {
    fn name(&self) -> String;
    fn compound(&self, text: &str) -> f64;
}

const BOOST: f64 = 0.293;
const CAPS_BOOST: f64 = 0.733;
const NEGATE: f64 = -0.74;
const NORM_ALPHA: f64 = 15.0;

const BOOSTERS_UP: &[&str] = &[
    "absolutely", "completely", "extremely", "really", "so", "totally", "very", "incredibly", "super", "truly",
];
const BOOSTERS_DOWN: &[&str] = &["barely", "hardly", "kinda", "slightly", "somewhat", "marginally", "little"];
const NEGATIONS: &[&str] = &["not", "no", "never", "nothing", "nobody", "none", "neither", "nor", "cannot", "without"];

fn is_negation(w: &str) -> bool {
    let w = w.to_lowercase();
    NEGATIONS.contains(&w.as_str()) || w.ends_with("n't")
}

/// Lexicon scorer in the style of VADER: word valences with booster,
/// capitalization, negation, contrastive "but" and exclamation adjustments,
/// normalized by `s / sqrt(s^2 + 15)`.
#[derive(Debug, Clone)]
pub struct LexiconSentiment {
    pub valence: HashMap<String, f64>,
}

impl LexiconSentiment {
    pub fn new(valence: HashMap<String, f64>) -> Self {
        LexiconSentiment { valence }
    }
}

impl SentimentScorer for LexiconSentiment {
    fn name(&self) -> String {
        "lexicon-sentiment/1.0".into()
    }

    fn compound(&self, text: &str) -> f64 {
        let toks = words(text);
        let any_lower = toks.iter().any(|t| t.chars().any(char::is_lowercase));
        let mut vals = vec![0.0; toks.len()];
        for (i, tok) in toks.iter().enumerate() {
            let lower = tok.to_lowercase();
            let Some(&base) = self.valence.get(&lower) else { continue };
            let sign = base.signum();
            let mut v = base;
            if any_lower && tok.len() > 1 && tok.chars().all(|c| !c.is_lowercase()) {
                v += sign * CAPS_BOOST;
            }
            for (k, damp) in [(1usize, 1.0), (2, 0.95), (3, 0.9)] {
                if i < k {
                    break;
                }
                let prev = toks[i - k].to_lowercase();
                if BOOSTERS_UP.contains(&prev.as_str()) {
                    v += sign * BOOST * damp;
                } else if BOOSTERS_DOWN.contains(&prev.as_str()) {
                    v -= sign * BOOST * damp;
                }
            }
            if (1..=3).any(|k| i >= k && is_negation(toks[i - k])) {
                v *= NEGATE;
            }
            vals[i] = v;
        }
        if let Some(b) = toks.iter().position(|t| t.eq_ignore_ascii_case("but")) {
            for (i, v) in vals.iter_mut().enumerate() {
                *v *= if i < b { 0.5 } else { 1.5 };
            }
        }
        let mut sum: f64 = vals.iter().sum();
        if sum != 0.0 {
            let bangs = text.matches('!').count().min(4) as f64;
            sum += sum.signum() * bangs * 0.292;
        }
        if sum == 0.0 {
            return 0.0;
        }
        (sum / (sum * sum + NORM_ALPHA).sqrt()).clamp(-1.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scorer() -> LexiconSentiment {
        LexiconSentiment::new(HashMap::from([("good".to_string(), 1.9), ("bad".to_string(), -2.5)]))
    }

    #[test]
    fn strict_thresholds() {
        assert_eq!(sentiment_category(-0.06), SentimentCategory::Negative);
        assert_eq!(sentiment_category(0.05), SentimentCategory::Neutral);
        assert_eq!(sentiment_category(-0.05), SentimentCategory::Neutral);
        assert_eq!(sentiment_category(0.0), SentimentCategory::Neutral);
        assert_eq!(sentiment_category(0.0501), SentimentCategory::Positive);
    }

    #[test]
    fn single_word_normalization() {
        let c = scorer().compound("good");
        assert!((c - 1.9 / (1.9f64 * 1.9 + 15.0).sqrt()).abs() < 1e-12);
        assert_eq!(scorer().compound("nothing here"), 0.0);
    }

    #[test]
    fn negation_and_boosters() {
        let s = scorer();
        assert!(s.compound("not good") < 0.0);
        assert!(s.compound("very good") > s.compound("good"));
        assert!(s.compound("good!!") > s.compound("good"));
        // contrast: the clause after "but" dominates
        assert!(s.compound("good but bad") < 0.0);
    }

    #[test]
    fn compound_is_bounded() {
        let long = "good ".repeat(500);
        let c = scorer().compound(&long);
        assert!(c <= 1.0 && c > 0.99);
    }
}
