//! Semantic similarity between an instance and a candidate c-event.

use std::collections::{BTreeSet, HashMap};

use crate::embed::{cosine, TextEmbedder};
use crate::error::{Error, Result};
use crate::text::content_lemmas;

/// Similarity in `[0, 1]`; identical texts score 1.
pub trait SemanticScorer: Sync {
    fn name(&self) -> String;

    fn score(&self, candidate: &str, reference: &str) -> Result<f64>;
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Offline default: idf-weighted F1 over content-lemma sets.
#[derive(Debug, Clone)]
pub struct IdfOverlapScorer {
    idf: HashMap<String, f64>,
    default_idf: f64,
}

impl IdfOverlapScorer {
    /// Idf weights `ln((1 + N) / (1 + df)) + 1` from a reference collection,
    /// usually the c-event texts. Unseen lemmas get the weight of df = 0.
    pub fn from_texts<'a>(texts: impl IntoIterator<Item = &'a str>) -> Self {
        let mut df: HashMap<String, usize> = HashMap::new();
        let mut n = 0usize;
        for t in texts {
            n += 1;
            for l in content_lemmas(t).into_iter().collect::<BTreeSet<_>>() {
                *df.entry(l).or_default() += 1;
            }
        }
        let nf = n as f64;
        let idf = df.into_iter().map(|(k, d)| (k, ((1.0 + nf) / (1.0 + d as f64)).ln() + 1.0)).collect();
        IdfOverlapScorer { idf, default_idf: (1.0 + nf).ln() + 1.0 }
    }

    fn weight(&self, lemma: &str) -> f64 {
        self.idf.get(lemma).copied().unwrap_or(self.default_idf)
    }
}

impl SemanticScorer for IdfOverlapScorer {
    fn name(&self) -> String {
        "idf-overlap-f1".into()
    }

    fn score(&self, candidate: &str, reference: &str) -> Result<f64> {
        let c: BTreeSet<String> = content_lemmas(candidate).into_iter().collect();
        let r: BTreeSet<String> = content_lemmas(reference).into_iter().collect();
        if c.is_empty() || r.is_empty() {
            return Ok(0.0);
        }
        let shared: f64 = c.intersection(&r).map(|l| self.weight(l)).sum();
        let p = shared / c.iter().map(|l| self.weight(l)).sum::<f64>();
        let rc = shared / r.iter().map(|l| self.weight(l)).sum::<f64>();
        Ok(f1(p, rc))
    }
}

/// Greedy token matching over embeddings: each token is matched to its most
/// similar counterpart, precision and recall are the mean best similarities
/// (clamped at 0) and the score is their F1.
pub struct GreedyMatchScorer<E: TextEmbedder> {
    pub embedder: E,
}

impl<E: TextEmbedder> SemanticScorer for GreedyMatchScorer<E> {
    fn name(&self) -> String {
        format!("greedy-match-f1/{}", self.embedder.name())
    }

    fn score(&self, candidate: &str, reference: &str) -> Result<f64> {
        let embed = |t: &str| -> Vec<Vec<f64>> { content_lemmas(t).iter().map(|w| self.embedder.embed_token(w)).collect() };
        let c = embed(candidate);
        let r = embed(reference);
        if c.is_empty() || r.is_empty() {
            return Ok(0.0);
        }
        let best = |a: &[Vec<f64>], b: &[Vec<f64>]| -> f64 {
            a.iter()
                .map(|x| b.iter().map(|y| cosine(x, y)).fold(f64::NEG_INFINITY, f64::max).max(0.0))
                .sum::<f64>()
                / a.len() as f64
        };
        let s = f1(best(&c, &r), best(&r, &c));
        if !s.is_finite() {
            return Err(Error::Scorer(format!("non-finite score for '{candidate}'")));
        }
        Ok(s.min(1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::HashEmbedder;

    fn scorers() -> Vec<Box<dyn SemanticScorer>> {
        vec![
            Box::new(IdfOverlapScorer::from_texts(["PersonX gets engaged", "PersonX gets a dog", "PersonX abandons ___ altogether"])),
            Box::new(GreedyMatchScorer { embedder: HashEmbedder::default() }),
        ]
    }

    #[test]
    fn self_similarity_is_maximal() {
        for s in scorers() {
            let v = s.score("she took my car without asking", "she took my car without asking").unwrap();
            assert!((v - 1.0).abs() < 1e-9, "{}: {v}", s.name());
        }
    }

    #[test]
    fn engagement_example_ranks_first() {
        for s in scorers() {
            let a = s.score("PersonX gets engaged", "got engaged last june").unwrap();
            let b = s.score("PersonX gets a dog", "got engaged last june").unwrap();
            assert!(a > b, "{}: {a} vs {b}", s.name());
        }
    }

    #[test]
    fn range() {
        for s in scorers() {
            let v = s.score("PersonX abandons ___ altogether", "my dog ran away").unwrap();
            assert!((0.0..=1.0).contains(&v));
        }
    }
}
