//! HDBSCAN: mutual-reachability minimum spanning tree, condensed cluster
//! tree and excess-of-mass cluster selection.

use serde::{Deserialize, Serialize};

use super::reduce::euclidean;
use crate::error::{Error, Result};

pub const NOISE: i64 = -1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HdbscanParams {
    pub min_cluster_size: usize,
    pub min_samples: usize,
    pub allow_single_cluster: bool,
}

impl Default for HdbscanParams {
    fn default() -> Self {
        HdbscanParams { min_cluster_size: 5, min_samples: 5, allow_single_cluster: false }
    }
}

fn distance_matrix(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = euclidean(&points[i], &points[j]);
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    d
}

/// Distance to the `k`-th nearest neighbor counting the point itself, so
/// `k = 1` gives 0.
pub fn core_distances(dist: &[Vec<f64>], k: usize) -> Vec<f64> {
    dist.iter()
        .map(|row| {
            let mut r = row.clone();
            r.sort_by(f64::total_cmp);
            r[(k.max(1) - 1).min(r.len() - 1)]
        })
        .collect()
}

/// Prim's algorithm on the complete mutual-reachability graph; edges are
/// returned sorted by weight (stable on ties).
fn mst(dist: &[Vec<f64>], core: &[f64]) -> Vec<(usize, usize, f64)> {
    let n = dist.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut from = vec![0usize; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut cur = 0;
    in_tree[0] = true;
    for _ in 1..n {
        for j in 0..n {
            if !in_tree[j] {
                let mr = dist[cur][j].max(core[cur]).max(core[j]);
                if mr < best[j] {
                    best[j] = mr;
                    from[j] = cur;
                }
            }
        }
        let mut next = usize::MAX;
        for j in 0..n {
            if !in_tree[j] && (next == usize::MAX || best[j] < best[next]) {
                next = j;
            }
        }
        in_tree[next] = true;
        edges.push((from[next], next, best[next]));
        cur = next;
    }
    edges.sort_by(|a, b| a.2.total_cmp(&b.2));
    edges
}

/// Row of the condensed tree: `child` is a point (< n) or a cluster label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondensedEdge {
    pub parent: usize,
    pub child: usize,
    pub lambda: f64,
    pub size: usize,
}

struct Linkage {
    left: usize,
    right: usize,
    dist: f64,
    size: usize,
}

fn single_linkage(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Linkage> {
    let mut parent: Vec<usize> = (0..2 * n).collect();
    let mut size = vec![1usize; 2 * n];
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut out = Vec::with_capacity(n - 1);
    for (k, &(a, b, d)) in edges.iter().enumerate() {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        let node = n + k;
        parent[ra] = node;
        parent[rb] = node;
        size[node] = size[ra] + size[rb];
        out.push(Linkage { left: ra, right: rb, dist: d, size: size[node] });
    }
    out
}

fn leaves(n: usize, link: &[Linkage], node: usize, out: &mut Vec<usize>) {
    let mut stack = vec![node];
    while let Some(x) = stack.pop() {
        if x < n {
            out.push(x);
        } else {
            stack.push(link[x - n].left);
            stack.push(link[x - n].right);
        }
    }
}

fn condense_tree(n: usize, link: &[Linkage], min_cluster_size: usize, lambda_cap: f64) -> Vec<CondensedEdge> {
    let root = 2 * n - 2;
    let mut label = vec![0usize; 2 * n - 1];
    label[root] = n;
    let mut next_label = n + 1;
    let mut out = Vec::new();
    let node_size = |x: usize| if x < n { 1 } else { link[x - n].size };
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        if node < n {
            continue;
        }
        let l = &link[node - n];
        let lambda = if l.dist > 0.0 { (1.0 / l.dist).min(lambda_cap) } else { lambda_cap };
        let (ls, rs) = (node_size(l.left), node_size(l.right));
        let parent = label[node];
        let fall_out = |child: usize, out: &mut Vec<CondensedEdge>| {
            let mut pts = Vec::new();
            leaves(n, link, child, &mut pts);
            pts.sort_unstable();
            for p in pts {
                out.push(CondensedEdge { parent, child: p, lambda, size: 1 });
            }
        };
        if ls >= min_cluster_size && rs >= min_cluster_size {
            for (c, s) in [(l.left, ls), (l.right, rs)] {
                label[c] = next_label;
                next_label += 1;
                out.push(CondensedEdge { parent, child: label[c], lambda, size: s });
                stack.push(c);
            }
        } else if ls < min_cluster_size && rs < min_cluster_size {
            fall_out(l.left, &mut out);
            fall_out(l.right, &mut out);
        } else if ls < min_cluster_size {
            fall_out(l.left, &mut out);
            label[l.right] = parent;
            stack.push(l.right);
        } else {
            fall_out(l.right, &mut out);
            label[l.left] = parent;
            stack.push(l.left);
        }
    }
    out
}

/// Excess-of-mass selection over the condensed tree. Returns the selected
/// cluster labels in ascending order.
fn select_clusters(tree: &[CondensedEdge], n: usize, allow_single_cluster: bool) -> Vec<usize> {
    let max_label = tree.iter().map(|e| e.parent.max(if e.size > 1 { e.child } else { 0 })).max().unwrap_or(n);
    let count = max_label + 1 - n;
    let mut birth = vec![0.0; count];
    for e in tree.iter().filter(|e| e.size > 1) {
        birth[e.child - n] = e.lambda;
    }
    let mut stability = vec![0.0; count];
    for e in tree {
        stability[e.parent - n] += (e.lambda - birth[e.parent - n]) * e.size as f64;
    }
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); count];
    for e in tree.iter().filter(|e| e.size > 1) {
        children[e.parent - n].push(e.child - n);
    }
    let mut selected = vec![false; count];
    let mut subtree_stability = stability.clone();
    for c in (0..count).rev() {
        if c == 0 && !allow_single_cluster {
            continue;
        }
        let child_sum: f64 = children[c].iter().map(|&k| subtree_stability[k]).sum();
        if !children[c].is_empty() && child_sum > stability[c] {
            subtree_stability[c] = child_sum;
        } else {
            selected[c] = true;
            let mut stack = children[c].clone();
            while let Some(k) = stack.pop() {
                selected[k] = false;
                stack.extend(children[k].iter().copied());
            }
        }
    }
    (0..count).filter(|&c| selected[c]).map(|c| c + n).collect()
}

/// Cluster labels (consecutive from 0, −1 for noise) for `points`.
/// All-identical input is a single cluster.
pub fn hdbscan(points: &[Vec<f64>], params: &HdbscanParams) -> Result<Vec<i64>> {
    let n = points.len();
    if params.min_cluster_size < 2 {
        return Err(Error::InvalidInput("min_cluster_size must be at least 2".into()));
    }
    if n < params.min_cluster_size {
        return Err(Error::TooFewRows { required: params.min_cluster_size, actual: n });
    }
    let dist = distance_matrix(points);
    if dist.iter().flatten().all(|&d| d == 0.0) {
        return Ok(vec![0; n]);
    }
    let core = core_distances(&dist, params.min_samples);
    let edges = mst(&dist, &core);
    let min_pos = edges.iter().map(|e| e.2).filter(|&d| d > 0.0).fold(f64::INFINITY, f64::min);
    let lambda_cap = 1e6 / min_pos;
    let link = single_linkage(n, &edges);
    let tree = condense_tree(n, &link, params.min_cluster_size, lambda_cap);
    let selected = select_clusters(&tree, n, params.allow_single_cluster);

    let mut parent_of = std::collections::HashMap::new();
    for e in tree.iter().filter(|e| e.size > 1) {
        parent_of.insert(e.child, e.parent);
    }
    let mut labels = vec![NOISE; n];
    for e in tree.iter().filter(|e| e.child < n) {
        let mut c = e.parent;
        loop {
            if let Some(pos) = selected.iter().position(|&s| s == c) {
                labels[e.child] = pos as i64;
                break;
            }
            match parent_of.get(&c) {
                Some(&p) => c = p,
                None => break,
            }
        }
    }
    Ok(labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn blobs(centers: &[[f64; 2]], per: usize, sd: f64, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, sd).unwrap();
        centers
            .iter()
            .flat_map(|c| (0..per).map(|_| vec![c[0] + noise.sample(&mut rng), c[1] + noise.sample(&mut rng)]).collect::<Vec<_>>())
            .collect()
    }

    #[test]
    fn three_blobs() {
        let pts = blobs(&[[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]], 20, 0.5, 4);
        let labels = hdbscan(&pts, &HdbscanParams { min_cluster_size: 10, min_samples: 5, allow_single_cluster: false }).unwrap();
        let clusters: std::collections::BTreeSet<i64> = labels.iter().copied().filter(|&l| l >= 0).collect();
        assert_eq!(clusters.len(), 3, "{labels:?}");
        let noise = labels.iter().filter(|&&l| l == NOISE).count();
        assert!(noise <= 3, "noise {noise}");
        for b in 0..3 {
            let blob: std::collections::BTreeSet<i64> = labels[b * 20..(b + 1) * 20].iter().copied().filter(|&l| l >= 0).collect();
            assert_eq!(blob.len(), 1);
        }
    }

    #[test]
    fn uniform_points_with_strict_params_are_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pts: Vec<Vec<f64>> = (0..60).map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect();
        let labels = hdbscan(&pts, &HdbscanParams { min_cluster_size: 40, min_samples: 20, allow_single_cluster: false }).unwrap();
        assert!(labels.iter().all(|&l| l == NOISE), "{labels:?}");
    }

    #[test]
    fn single_blob() {
        let pts = blobs(&[[3.0, 3.0]], 30, 0.2, 5);
        let labels = hdbscan(&pts, &HdbscanParams { min_cluster_size: 10, min_samples: 5, allow_single_cluster: true }).unwrap();
        assert!(labels.iter().all(|&l| l == 0), "{labels:?}");
    }

    #[test]
    fn identical_points() {
        let pts = vec![vec![1.0, 1.0]; 12];
        assert_eq!(hdbscan(&pts, &HdbscanParams::default()).unwrap(), vec![0; 12]);
    }

    #[test]
    fn too_few_rows() {
        let pts = vec![vec![1.0], vec![2.0]];
        assert!(matches!(hdbscan(&pts, &HdbscanParams::default()), Err(Error::TooFewRows { .. })));
    }

    #[test]
    fn core_distance_counts_self() {
        let d = vec![vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 2.0], vec![3.0, 2.0, 0.0]];
        assert_eq!(core_distances(&d, 1), vec![0.0, 0.0, 0.0]);
        assert_eq!(core_distances(&d, 2), vec![1.0, 1.0, 2.0]);
    }

    #[test]
    fn labels_are_consecutive() {
        let pts = blobs(&[[0.0, 0.0], [20.0, 0.0], [0.0, 20.0], [20.0, 20.0]], 15, 0.5, 6);
        let labels = hdbscan(&pts, &HdbscanParams { min_cluster_size: 8, min_samples: 4, allow_single_cluster: false }).unwrap();
        let max = *labels.iter().max().unwrap();
        for c in 0..=max {
            assert!(labels.contains(&c));
        }
    }
}
