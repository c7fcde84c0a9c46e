//! Bayesian optimization of reduction and clustering hyperparameters.
//!
//! Sequential model-based search over a discrete grid: a Gaussian-process
//! surrogate (RBF kernel on unit-scaled coordinates) is fitted to the
//! evaluated points and the next point maximizes expected improvement.
//! Points are never evaluated twice; when the budget covers the whole grid
//! the search is exhaustive.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TuneParams {
    pub n_neighbors: usize,
    pub n_components: usize,
    pub min_cluster_size: usize,
    pub min_samples: usize,
}

impl TuneParams {
    fn coords(&self) -> [f64; 4] {
        [self.n_neighbors as f64, self.n_components as f64, self.min_cluster_size as f64, self.min_samples as f64]
    }
}

/// Candidate values per hyperparameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub n_neighbors: Vec<usize>,
    pub n_components: Vec<usize>,
    pub min_cluster_size: Vec<usize>,
    pub min_samples: Vec<usize>,
}

fn clamp_range(lo: usize, hi: usize, cap: usize, floor: usize) -> Vec<usize> {
    let hi = hi.min(cap).max(floor);
    let lo = lo.min(hi).max(floor);
    (lo..=hi).collect()
}

impl SearchSpace {
    /// Default ranges n_neighbors 5..=50, n_components 2..=10,
    /// min_cluster_size 5..=50, min_samples 1..=20, clamped to what `n_rows`
    /// points in `dim` dimensions support.
    pub fn default_for(n_rows: usize, dim: usize) -> Self {
        SearchSpace::from_ranges((5, 50), (2, 10), (5, 50), (1, 20), n_rows, dim)
    }

    pub fn from_ranges(
        n_neighbors: (usize, usize),
        n_components: (usize, usize),
        min_cluster_size: (usize, usize),
        min_samples: (usize, usize),
        n_rows: usize,
        dim: usize,
    ) -> Self {
        SearchSpace {
            n_neighbors: clamp_range(n_neighbors.0, n_neighbors.1, n_rows.saturating_sub(1), 2),
            n_components: clamp_range(n_components.0, n_components.1, dim, 1),
            min_cluster_size: clamp_range(min_cluster_size.0, min_cluster_size.1, n_rows, 2),
            min_samples: clamp_range(min_samples.0, min_samples.1, n_rows, 1),
        }
    }

    pub fn size(&self) -> usize {
        self.n_neighbors.len() * self.n_components.len() * self.min_cluster_size.len() * self.min_samples.len()
    }

    pub fn all(&self) -> Vec<TuneParams> {
        let mut out = Vec::with_capacity(self.size());
        for &a in &self.n_neighbors {
            for &b in &self.n_components {
                for &c in &self.min_cluster_size {
                    for &d in &self.min_samples {
                        out.push(TuneParams { n_neighbors: a, n_components: b, min_cluster_size: c, min_samples: d });
                    }
                }
            }
        }
        out
    }

    fn bounds(&self) -> [(f64, f64); 4] {
        let b = |v: &Vec<usize>| {
            let lo = *v.iter().min().unwrap_or(&0) as f64;
            let hi = *v.iter().max().unwrap_or(&0) as f64;
            (lo, hi)
        };
        [b(&self.n_neighbors), b(&self.n_components), b(&self.min_cluster_size), b(&self.min_samples)]
    }

    fn scaled(&self, p: &TuneParams) -> [f64; 4] {
        let c = p.coords();
        let b = self.bounds();
        std::array::from_fn(|k| if b[k].1 > b[k].0 { (c[k] - b[k].0) / (b[k].1 - b[k].0) } else { 0.0 })
    }
}

/// One objective evaluation; `score` is `None` when undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub index: usize,
    pub params: TuneParams,
    pub score: Option<f64>,
    pub note: String,
}

impl Evaluation {
    /// Score used for optimization: undefined counts as −1.
    pub fn effective(&self) -> f64 {
        self.score.unwrap_or(-1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best: TuneParams,
    pub best_score: f64,
    pub history: Vec<Evaluation>,
}

const INITIAL_DESIGN: usize = 5;
const CANDIDATE_SAMPLE: usize = 2000;
const LENGTH_SCALE: f64 = 0.25;
const JITTER: f64 = 1e-6;
const XI: f64 = 0.01;

fn rbf(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-d2 / (2.0 * LENGTH_SCALE * LENGTH_SCALE)).exp()
}

struct Surrogate {
    xs: Vec<[f64; 4]>,
    alpha: DVector<f64>,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    mean: f64,
    sd: f64,
}

impl Surrogate {
    fn fit(xs: Vec<[f64; 4]>, ys: &[f64]) -> Option<Self> {
        let n = xs.len();
        let mean = ys.iter().sum::<f64>() / n as f64;
        let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n as f64;
        let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
        let k = DMatrix::from_fn(n, n, |i, j| rbf(&xs[i], &xs[j]) + if i == j { JITTER } else { 0.0 });
        let chol = k.cholesky()?;
        let y = DVector::from_iterator(n, ys.iter().map(|v| (v - mean) / sd));
        let alpha = chol.solve(&y);
        Some(Surrogate { xs, alpha, chol, mean, sd })
    }

    fn predict(&self, x: &[f64; 4]) -> (f64, f64) {
        let ks = DVector::from_iterator(self.xs.len(), self.xs.iter().map(|xi| rbf(xi, x)));
        let mu = ks.dot(&self.alpha);
        let v = self.chol.solve(&ks);
        let var = (1.0 + JITTER - ks.dot(&v)).max(1e-12);
        (self.mean + mu * self.sd, var.sqrt() * self.sd)
    }
}

fn expected_improvement(mu: f64, sigma: f64, best: f64) -> f64 {
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    let imp = mu - best - XI;
    let z = imp / sigma;
    imp * n.cdf(z) + sigma * n.pdf(z)
}

/// Maximizes `objective` over `space` with at most `budget` evaluations.
/// Fails when every evaluation is undefined.
pub fn tune<F>(space: &SearchSpace, budget: usize, seed: u64, mut objective: F) -> Result<TuneResult>
where
    F: FnMut(&TuneParams) -> Result<Option<f64>>,
{
    if budget < 5 {
        return Err(Error::Config(format!("tuning budget must be at least 5, got {budget}")));
    }
    let all = space.all();
    if all.is_empty() {
        return Err(Error::Config("empty hyperparameter search space".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut history: Vec<Evaluation> = Vec::new();
    let mut evaluated: BTreeSet<TuneParams> = BTreeSet::new();
    let mut run = |p: TuneParams, history: &mut Vec<Evaluation>| {
        let (score, note) = match objective(&p) {
            Ok(Some(s)) => (Some(s), String::new()),
            Ok(None) => (None, "undefined score".to_string()),
            Err(e) => (None, e.to_string()),
        };
        history.push(Evaluation { index: history.len(), params: p, score, note });
    };

    if budget >= all.len() {
        for p in all {
            run(p, &mut history);
        }
    } else {
        let mut order = all.clone();
        order.shuffle(&mut rng);
        for p in order.iter().take(INITIAL_DESIGN.min(budget)) {
            evaluated.insert(*p);
            run(*p, &mut history);
        }
        while history.len() < budget {
            let xs: Vec<[f64; 4]> = history.iter().map(|e| space.scaled(&e.params)).collect();
            let ys: Vec<f64> = history.iter().map(Evaluation::effective).collect();
            let best = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let remaining: Vec<TuneParams> = all.iter().filter(|p| !evaluated.contains(p)).copied().collect();
            if remaining.is_empty() {
                break;
            }
            let pool: Vec<TuneParams> = if remaining.len() > CANDIDATE_SAMPLE {
                remaining.choose_multiple(&mut rng, CANDIDATE_SAMPLE).copied().collect()
            } else {
                remaining
            };
            let next = match Surrogate::fit(xs, &ys) {
                Some(gp) => {
                    let mut best_p = pool[0];
                    let mut best_ei = f64::NEG_INFINITY;
                    for p in &pool {
                        let (mu, sigma) = gp.predict(&space.scaled(p));
                        let ei = expected_improvement(mu, sigma, best);
                        if ei > best_ei {
                            best_ei = ei;
                            best_p = *p;
                        }
                    }
                    best_p
                }
                None => pool[0],
            };
            evaluated.insert(next);
            run(next, &mut history);
        }
    }

    let mut best: Option<&Evaluation> = None;
    for e in history.iter().filter(|e| e.score.is_some()) {
        if best.map_or(true, |b| e.effective() > b.effective()) {
            best = Some(e);
        }
    }
    let Some(best) = best else {
        let diagnostics = history.iter().map(|e| format!("{:?}: {}", e.params, e.note)).collect::<Vec<_>>().join("; ");
        return Err(Error::TuningFailed { evaluations: history.len(), diagnostics });
    };
    Ok(TuneResult { best: best.params, best_score: best.effective(), history })
}
