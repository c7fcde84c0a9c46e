//! Density-Based Clustering Validation.
//!
//! Each cluster gets a validity index comparing its density sparseness (the
//! largest internal edge of its mutual-reachability MST) with its density
//! separation (smallest mutual-reachability distance to another cluster's
//! internal nodes). The score is the size-weighted sum over clusters with
//! noise points counted in the total.

use std::collections::BTreeMap;

use super::hdbscan::NOISE;
use super::reduce::euclidean;

/// Inverse-distance-power average core distance of point `i` within its
/// cluster. Coincident points contribute 0 to the sum.
fn all_points_core(points: &[Vec<f64>], members: &[usize], i: usize, dim: f64) -> f64 {
    if members.len() < 2 {
        return 0.0;
    }
    let mut sum = 0.0;
    for &j in members {
        if j != i {
            let d = euclidean(&points[i], &points[j]);
            if d > 0.0 {
                sum += (1.0 / d).powf(dim);
            }
        }
    }
    if sum == 0.0 {
        return 0.0;
    }
    (sum / (members.len() - 1) as f64).powf(-1.0 / dim)
}

fn mreach(points: &[Vec<f64>], core: &[f64], i: usize, j: usize) -> f64 {
    euclidean(&points[i], &points[j]).max(core[i]).max(core[j])
}

/// MST edges (as local index pairs with weight) of one cluster.
fn cluster_mst(points: &[Vec<f64>], core: &[f64], members: &[usize]) -> Vec<(usize, usize, f64)> {
    let m = members.len();
    let mut in_tree = vec![false; m];
    let mut best = vec![f64::INFINITY; m];
    let mut from = vec![0usize; m];
    let mut edges = Vec::new();
    if m == 0 {
        return edges;
    }
    let mut cur = 0;
    in_tree[0] = true;
    for _ in 1..m {
        for j in 0..m {
            if !in_tree[j] {
                let w = mreach(points, core, members[cur], members[j]);
                if w < best[j] {
                    best[j] = w;
                    from[j] = cur;
                }
            }
        }
        let next = (0..m).filter(|&j| !in_tree[j]).min_by(|&a, &b| best[a].total_cmp(&best[b])).unwrap();
        in_tree[next] = true;
        edges.push((from[next], next, best[next]));
        cur = next;
    }
    edges
}

/// DBCV in `[-1, 1]`, or `None` when fewer than two clusters exist.
pub fn dbcv_score(points: &[Vec<f64>], labels: &[i64]) -> Option<f64> {
    let mut clusters: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        if l != NOISE {
            clusters.entry(l).or_default().push(i);
        }
    }
    if clusters.len() < 2 {
        return None;
    }
    let dim = points.first().map_or(1, Vec::len).max(1) as f64;
    let mut core = vec![0.0; points.len()];
    for members in clusters.values() {
        for &i in members {
            core[i] = all_points_core(points, members, i, dim);
        }
    }
    // internal nodes and density sparseness per cluster
    let mut internal: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    let mut sparseness: BTreeMap<i64, f64> = BTreeMap::new();
    for (&l, members) in &clusters {
        let edges = cluster_mst(points, &core, members);
        let mut degree = vec![0usize; members.len()];
        for &(a, b, _) in &edges {
            degree[a] += 1;
            degree[b] += 1;
        }
        let inner: Vec<usize> = (0..members.len()).filter(|&k| degree[k] > 1).collect();
        let inner_edges: Vec<f64> =
            edges.iter().filter(|(a, b, _)| degree[*a] > 1 && degree[*b] > 1).map(|e| e.2).collect();
        let dsc = if inner_edges.is_empty() {
            edges.iter().map(|e| e.2).fold(0.0, f64::max)
        } else {
            inner_edges.iter().copied().fold(0.0, f64::max)
        };
        let nodes = if inner.is_empty() { members.clone() } else { inner.iter().map(|&k| members[k]).collect() };
        internal.insert(l, nodes);
        sparseness.insert(l, dsc);
    }
    let total = labels.len() as f64;
    let mut score = 0.0;
    for (&l, members) in &clusters {
        let mut sep = f64::INFINITY;
        for (&o, other) in &internal {
            if o == l {
                continue;
            }
            for &i in &internal[&l] {
                for &j in other {
                    sep = sep.min(mreach(points, &core, i, j));
                }
            }
        }
        let dsc = sparseness[&l];
        let denom = sep.max(dsc);
        let v = if denom > 0.0 { (sep - dsc) / denom } else { 0.0 };
        score += members.len() as f64 / total * v;
    }
    Some(score)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn two_blobs(seed: u64) -> (Vec<Vec<f64>>, Vec<i64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.3).unwrap();
        let mut pts = Vec::new();
        let mut labels = Vec::new();
        for (k, c) in [[0.0, 0.0], [20.0, 20.0]].iter().enumerate() {
            for _ in 0..25 {
                pts.push(vec![c[0] + noise.sample(&mut rng), c[1] + noise.sample(&mut rng)]);
                labels.push(k as i64);
            }
        }
        (pts, labels)
    }

    #[test]
    fn separated_blobs_score_high() {
        let (pts, labels) = two_blobs(1);
        let s = dbcv_score(&pts, &labels).unwrap();
        assert!(s > 0.5 && s <= 1.0, "{s}");
    }

    #[test]
    fn shuffled_labels_score_lower() {
        let (pts, labels) = two_blobs(2);
        let truth = dbcv_score(&pts, &labels).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let mut l = labels.clone();
            l.shuffle(&mut rng);
            let s = dbcv_score(&pts, &l).unwrap();
            assert!(s <= truth, "{s} > {truth}");
            assert!((-1.0..=1.0).contains(&s));
        }
    }

    #[test]
    fn one_cluster_is_undefined() {
        let (pts, _) = two_blobs(4);
        assert_eq!(dbcv_score(&pts, &vec![0; pts.len()]), None);
        assert_eq!(dbcv_score(&pts, &vec![NOISE; pts.len()]), None);
    }

    #[test]
    fn noise_lowers_the_weighting() {
        let (pts, mut labels) = two_blobs(5);
        let full = dbcv_score(&pts, &labels).unwrap();
        labels[0] = NOISE;
        labels[30] = NOISE;
        let partial = dbcv_score(&pts, &labels).unwrap();
        assert!(partial < full);
    }

    #[test]
    fn hand_checked_line() {
        // clusters {0, 1} and {10, 11} on a line, 1-D: core distance of each
        // point is its single neighbor distance 1; sparseness 1 (no internal
        // nodes, so the MST edge), separation 9; V = 8/9 for both.
        let pts = vec![vec![0.0], vec![1.0], vec![10.0], vec![11.0]];
        let s = dbcv_score(&pts, &[0, 0, 1, 1]).unwrap();
        assert!((s - 8.0 / 9.0).abs() < 1e-12, "{s}");
    }
}
