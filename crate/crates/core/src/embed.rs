//! Text embeddings.
//!
//! [`TextEmbedder`] is the seam for a pretrained sentence/token encoder.
//! [`HashEmbedder`] is the offline default: each token is the normalized sum
//! of pseudo-random Gaussian vectors keyed by its character trigrams, so
//! morphological variants land close together and results are reproducible
//! across runs and platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::text::content_lemmas;

pub trait TextEmbedder: Sync {
    fn name(&self) -> String;

    fn dim(&self) -> usize;

    fn embed_token(&self, token: &str) -> Vec<f64>;

    /// Mean of the content-lemma token vectors, L2-normalized; the zero
    /// vector when the text has no content words.
    fn embed_text(&self, text: &str) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim()];
        for tok in content_lemmas(text) {
            for (a, v) in acc.iter_mut().zip(self.embed_token(&tok)) {
                *a += v;
            }
        }
        normalize(&mut acc);
        acc
    }
}

pub fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

#[derive(Debug, Clone)]
pub struct HashEmbedder {
    pub dim: usize,
    pub seed: u64,
}

impl Default for HashEmbedder {
    fn default() -> Self {
        HashEmbedder { dim: 64, seed: 0x5eed }
    }
}

// 64-bit FNV-1a; stable across platforms and compiler versions, unlike the
// std hasher.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

impl HashEmbedder {
    fn gram_vector(&self, gram: &str) -> impl Iterator<Item = f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(gram.as_bytes()) ^ self.seed);
        (0..self.dim).map(move |_| StandardNormal.sample(&mut rng))
    }
}

impl TextEmbedder for HashEmbedder {
    fn name(&self) -> String {
        format!("hash-trigram/{}d/{}", self.dim, self.seed)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_token(&self, token: &str) -> Vec<f64> {
        let padded: Vec<char> = format!("<{}>", token.to_lowercase()).chars().collect();
        let mut v = vec![0.0; self.dim];
        // the whole word is its own feature so short tokens stay distinct
        let whole: String = padded.iter().collect();
        for (a, x) in v.iter_mut().zip(self.gram_vector(&whole)) {
            *a += x;
        }
        for w in padded.windows(3) {
            let g: String = w.iter().collect();
            for (a, x) in v.iter_mut().zip(self.gram_vector(&g)) {
                *a += x;
            }
        }
        normalize(&mut v);
        v
    }
}
