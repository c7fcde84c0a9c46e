//! Sparse tf-idf vectors with smoothed idf and L2 normalization.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::text::alnum_tokens;

pub type SparseVec = BTreeMap<String, f64>;

/// `tf · idf` with raw term counts and `idf = ln((1 + N) / (1 + df)) + 1`,
/// each vector scaled to unit L2 norm. The vocabulary is the union of the
/// document tokens.
pub fn tfidf_from_tokens(docs: &[Vec<String>]) -> Result<Vec<SparseVec>> {
    if docs.is_empty() || docs.iter().all(Vec::is_empty) {
        return Err(Error::InvalidInput("tf-idf needs at least one non-empty text".into()));
    }
    let n = docs.len() as f64;
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for d in docs {
        let mut seen: Vec<&str> = d.iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        for t in seen {
            *df.entry(t).or_default() += 1;
        }
    }
    Ok(docs
        .iter()
        .map(|d| {
            let mut v = SparseVec::new();
            for t in d {
                *v.entry(t.clone()).or_default() += 1.0;
            }
            for (t, w) in v.iter_mut() {
                *w *= ((1.0 + n) / (1.0 + df[t.as_str()] as f64)).ln() + 1.0;
            }
            let norm = v.values().map(|w| w * w).sum::<f64>().sqrt();
            if norm > 0.0 {
                v.values_mut().for_each(|w| *w /= norm);
            }
            v
        })
        .collect())
}

pub fn tfidf_vectors(texts: &[&str]) -> Result<Vec<SparseVec>> {
    let docs: Vec<Vec<String>> = texts.iter().map(|t| alnum_tokens(t)).collect();
    tfidf_from_tokens(&docs)
}

/// Cosine of two sparse vectors; 0 when either is zero.
pub fn cosine(a: &SparseVec, b: &SparseVec) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let dot: f64 = small.iter().filter_map(|(k, x)| large.get(k).map(|y| x * y)).sum();
    let na = a.values().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.values().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_texts_identical_vectors() {
        let v = tfidf_vectors(&["she took my car", "she took my car"]).unwrap();
        assert_eq!(v[0], v[1]);
    }

    #[test]
    fn single_document_weights_are_equal() {
        let v = tfidf_vectors(&["alpha beta gamma"]).unwrap();
        let w: Vec<f64> = v[0].values().copied().collect();
        for x in &w {
            assert!((x - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn three_document_hand_computation() {
        // docs: "a b", "a c c", "b"; N = 3
        // df: a=2, b=2, c=1 -> idf(a)=idf(b)=ln(4/3)+1, idf(c)=ln(2)+1
        let v = tfidf_vectors(&["a b", "a c c", "b"]).unwrap();
        let i2 = (4.0f64 / 3.0).ln() + 1.0;
        let i1 = 2.0f64.ln() + 1.0;
        let inv = 1.0 / 2f64.sqrt();
        assert!((v[0]["a"] - inv).abs() < 1e-9 && (v[0]["b"] - inv).abs() < 1e-9);
        let (wa, wc) = (i2, 2.0 * i1);
        let n = (wa * wa + wc * wc).sqrt();
        assert!((v[1]["a"] - wa / n).abs() < 1e-9);
        assert!((v[1]["c"] - wc / n).abs() < 1e-9);
        assert!((v[2]["b"] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(tfidf_vectors(&["", "!!"]).is_err());
        assert!(tfidf_vectors(&[]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn cosine_symmetric_and_reflexive(a in "[a-e ]{1,30}", b in "[a-e ]{1,30}") {
            let Ok(v) = tfidf_vectors(&[&a, &b]) else { return Ok(()) };
            proptest::prop_assert!((cosine(&v[0], &v[1]) - cosine(&v[1], &v[0])).abs() < 1e-12);
            for x in &v {
                if !x.is_empty() {
                    proptest::prop_assert!((cosine(x, x) - 1.0).abs() < 1e-12);
                }
            }
        }
    }
}
