//! Dimensionality reduction: PCA and a compact UMAP.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Points = Vec<Vec<f64>>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReduceParams {
    pub n_neighbors: usize,
    pub min_dist: f64,
    pub n_components: usize,
}

impl Default for ReduceParams {
    fn default() -> Self {
        ReduceParams { n_neighbors: 15, min_dist: 0.1, n_components: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Reducer {
    #[default]
    Umap,
    Pca,
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn check_shape(points: &[Vec<f64>]) -> Result<usize> {
    let dim = points.first().map_or(0, Vec::len);
    for (row, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: p.len(), row });
        }
    }
    Ok(dim)
}

/// Projects `points` to `params.n_components` dimensions. Requires at least
/// `n_neighbors + 1` rows and `n_components <= input dim`.
pub fn reduce_dims(points: &[Vec<f64>], params: &ReduceParams, seed: u64, method: Reducer) -> Result<Points> {
    let dim = check_shape(points)?;
    if points.len() < params.n_neighbors + 1 {
        return Err(Error::TooFewRows { required: params.n_neighbors + 1, actual: points.len() });
    }
    if params.n_components == 0 || params.n_components > dim {
        return Err(Error::InvalidInput(format!(
            "n_components must be in 1..={dim}, got {}",
            params.n_components
        )));
    }
    match method {
        Reducer::Pca => Ok(pca(points, params.n_components)),
        Reducer::Umap => Ok(umap(points, params, seed)),
    }
}

/// Principal-component projection of the centered data. Component signs are
/// fixed so the largest-magnitude loading is positive.
pub fn pca(points: &[Vec<f64>], k: usize) -> Points {
    let n = points.len();
    let d = points[0].len();
    let mean: Vec<f64> = (0..d).map(|j| points.iter().map(|p| p[j]).sum::<f64>() / n as f64).collect();
    let x = DMatrix::from_fn(n, d, |i, j| points[i][j] - mean[j]);
    let cov = x.transpose() * &x;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut basis = DMatrix::zeros(d, k);
    for (c, &idx) in order.iter().take(k).enumerate() {
        let mut v = eig.eigenvectors.column(idx).into_owned();
        let pivot = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if pivot < 0.0 {
            v.neg_mut();
        }
        basis.set_column(c, &v);
    }
    let proj = x * basis;
    (0..n).map(|i| proj.row(i).iter().copied().collect()).collect()
}

/// Fits the low-dimensional similarity curve `1 / (1 + a d^(2b))` to the
/// target membership implied by `min_dist` (spread 1).
pub fn fit_ab(min_dist: f64) -> (f64, f64) {
    let xs: Vec<f64> = (1..300).map(|i| i as f64 * 3.0 / 300.0).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| if x < min_dist { 1.0 } else { (-(x - min_dist)).exp() }).collect();
    let loss = |a: f64, b: f64| -> f64 {
        xs.iter().zip(&ys).map(|(&x, &y)| (1.0 / (1.0 + a * x.powf(2.0 * b)) - y).powi(2)).sum()
    };
    let (mut a, mut b) = (1.0, 1.0);
    let mut best = loss(a, b);
    let mut step = 0.5;
    while step > 1e-5 {
        let mut improved = false;
        for (da, db) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let (na, nb) = (a + da, b + db);
            if na <= 0.0 || nb <= 0.0 {
                continue;
            }
            let l = loss(na, nb);
            if l < best {
                best = l;
                a = na;
                b = nb;
                improved = true;
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    (a, b)
}

fn knn(points: &[Vec<f64>], k: usize) -> Vec<Vec<(usize, f64)>> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut d: Vec<(usize, f64)> =
                points.iter().enumerate().filter(|(j, _)| *j != i).map(|(j, q)| (j, euclidean(p, q))).collect();
            d.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            d.truncate(k);
            d
        })
        .collect()
}

/// Fuzzy simplicial set: per-point smooth kNN membership, symmetrized with
/// the probabilistic t-conorm.
fn fuzzy_graph(points: &[Vec<f64>], k: usize) -> Vec<(usize, usize, f64)> {
    let n = points.len();
    let neighbors = knn(points, k);
    let target = (k as f64).log2();
    let mut w = vec![std::collections::BTreeMap::<usize, f64>::new(); n];
    for (i, nb) in neighbors.iter().enumerate() {
        let rho = nb.iter().map(|x| x.1).find(|&d| d > 0.0).unwrap_or(0.0);
        let (mut lo, mut hi, mut sigma) = (0.0, f64::INFINITY, 1.0);
        for _ in 0..64 {
            let s: f64 = nb.iter().map(|&(_, d)| (-((d - rho).max(0.0)) / sigma).exp()).sum();
            if (s - target).abs() < 1e-5 {
                break;
            }
            if s > target {
                hi = sigma;
                sigma = (lo + hi) / 2.0;
            } else {
                lo = sigma;
                sigma = if hi.is_infinite() { sigma * 2.0 } else { (lo + hi) / 2.0 };
            }
        }
        let mean_d = nb.iter().map(|x| x.1).sum::<f64>() / nb.len().max(1) as f64;
        sigma = sigma.max(1e-3 * mean_d).max(1e-12);
        for &(j, d) in nb {
            w[i].insert(j, (-((d - rho).max(0.0)) / sigma).exp());
        }
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for (&j, &a) in &w[i] {
            let b = w[j].get(&i).copied().unwrap_or(0.0);
            if i < j || b == 0.0 {
                let v = a + b - a * b;
                if v > 0.0 {
                    edges.push((i.min(j), i.max(j), v));
                }
            }
        }
    }
    edges.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    edges.dedup_by(|x, y| x.0 == y.0 && x.1 == y.1);
    edges
}

const UMAP_EPOCHS: usize = 200;
const NEGATIVE_SAMPLES: usize = 5;

/// Compact UMAP: kNN fuzzy graph, PCA initialization scaled to a 10-unit
/// box, and the standard attractive/repulsive SGD with a seeded RNG.
pub fn umap(points: &[Vec<f64>], params: &ReduceParams, seed: u64) -> Points {
    let n = points.len();
    let dim = params.n_components;
    let k = params.n_neighbors.clamp(2, n - 1);
    let edges = fuzzy_graph(points, k);
    let (a, b) = fit_ab(params.min_dist);

    let mut y = pca(points, dim);
    for c in 0..dim {
        let max = y.iter().map(|r| r[c].abs()).fold(0.0, f64::max);
        let scale = if max > 0.0 { 10.0 / max } else { 1.0 };
        for r in y.iter_mut() {
            r[c] *= scale;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for r in y.iter_mut() {
        for v in r.iter_mut() {
            *v += rng.gen_range(-1e-4..1e-4);
        }
    }

    let wmax = edges.iter().map(|e| e.2).fold(0.0, f64::max);
    let eps: Vec<f64> = edges.iter().map(|e| wmax / e.2).collect();
    let mut next = eps.clone();
    let clip = |g: f64| g.clamp(-4.0, 4.0);
    for epoch in 0..UMAP_EPOCHS {
        let alpha = 1.0 - epoch as f64 / UMAP_EPOCHS as f64;
        for (e, &(i, j, _)) in edges.iter().enumerate() {
            if next[e] > (epoch + 1) as f64 {
                continue;
            }
            next[e] += eps[e];
            let d2: f64 = (0..dim).map(|c| (y[i][c] - y[j][c]).powi(2)).sum();
            if d2 > 0.0 {
                let coef = -2.0 * a * b * d2.powf(b - 1.0) / (1.0 + a * d2.powf(b));
                for c in 0..dim {
                    let g = clip(coef * (y[i][c] - y[j][c])) * alpha;
                    y[i][c] += g;
                    y[j][c] -= g;
                }
            }
            for _ in 0..NEGATIVE_SAMPLES {
                let m = rng.gen_range(0..n);
                if m == i {
                    continue;
                }
                let d2: f64 = (0..dim).map(|c| (y[i][c] - y[m][c]).powi(2)).sum();
                let coef = if d2 > 0.0 { 2.0 * b / ((0.001 + d2) * (1.0 + a * d2.powf(b))) } else { 0.0 };
                for c in 0..dim {
                    let g = if coef > 0.0 { clip(coef * (y[i][c] - y[m][c])) } else { 4.0 };
                    y[i][c] += g * alpha;
                }
            }
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    pub(crate) fn blobs(centers: &[Vec<f64>], per: usize, sd: f64, seed: u64) -> (Points, Vec<i64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, sd).unwrap();
        let mut pts = Vec::new();
        let mut labels = Vec::new();
        for (k, c) in centers.iter().enumerate() {
            for _ in 0..per {
                pts.push(c.iter().map(|x| x + noise.sample(&mut rng)).collect());
                labels.push(k as i64);
            }
        }
        (pts, labels)
    }

    fn silhouette(points: &[Vec<f64>], labels: &[i64]) -> f64 {
        let n = points.len();
        let mut total = 0.0;
        for i in 0..n {
            let mut by: std::collections::BTreeMap<i64, (f64, usize)> = Default::default();
            for j in 0..n {
                if i != j {
                    let e = by.entry(labels[j]).or_default();
                    e.0 += euclidean(&points[i], &points[j]);
                    e.1 += 1;
                }
            }
            let a = by[&labels[i]].0 / by[&labels[i]].1 as f64;
            let b = by.iter().filter(|(l, _)| **l != labels[i]).map(|(_, (s, c))| s / *c as f64).fold(f64::INFINITY, f64::min);
            total += (b - a) / a.max(b);
        }
        total / n as f64
    }

    fn centers10() -> Vec<Vec<f64>> {
        (0..3).map(|k| (0..10).map(|j| if j == k { 20.0 } else { 0.0 }).collect()).collect()
    }

    #[test]
    fn full_rank_pca_preserves_distances() {
        let (pts, _) = blobs(&centers10(), 10, 1.0, 1);
        let y = reduce_dims(&pts, &ReduceParams { n_components: 10, ..Default::default() }, 0, Reducer::Pca).unwrap();
        let mut err: f64 = 0.0;
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                err = err.max((euclidean(&pts[i], &pts[j]) - euclidean(&y[i], &y[j])).abs());
            }
        }
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn separated_blobs_survive_reduction() {
        let (pts, labels) = blobs(&centers10(), 20, 1.0, 2);
        let params = ReduceParams { n_components: 2, n_neighbors: 10, min_dist: 0.1 };
        for method in [Reducer::Pca, Reducer::Umap] {
            let y = reduce_dims(&pts, &params, 7, method).unwrap();
            let s = silhouette(&y, &labels);
            assert!(s > 0.5, "{method:?}: silhouette {s}");
        }
    }

    #[test]
    fn umap_is_seed_deterministic() {
        let (pts, _) = blobs(&centers10(), 10, 1.0, 3);
        let params = ReduceParams { n_components: 2, n_neighbors: 5, min_dist: 0.1 };
        let a = reduce_dims(&pts, &params, 11, Reducer::Umap).unwrap();
        let b = reduce_dims(&pts, &params, 11, Reducer::Umap).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_few_rows_names_minimum() {
        let pts = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 2.0]];
        let err = reduce_dims(&pts, &ReduceParams { n_neighbors: 15, min_dist: 0.1, n_components: 2 }, 0, Reducer::Pca)
            .unwrap_err();
        assert!(matches!(err, Error::TooFewRows { required: 16, actual: 2 }));
        assert!(err.to_string().contains("16"));
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let pts = vec![vec![0.0, 1.0], vec![1.0]];
        assert!(matches!(
            reduce_dims(&pts, &ReduceParams { n_neighbors: 1, min_dist: 0.1, n_components: 1 }, 0, Reducer::Pca),
            Err(Error::DimensionMismatch { row: 1, .. })
        ));
    }

    #[test]
    fn curve_fit_matches_known_values() {
        // min_dist 0.1, spread 1: the reference curve fit gives a ≈ 1.577, b ≈ 0.895
        let (a, b) = fit_ab(0.1);
        assert!((a - 1.577).abs() < 0.05 && (b - 0.895).abs() < 0.03, "{a} {b}");
    }
}
