//! HDBSCAN labels and DBCV scores checked against frozen reference values
//! (labels from scikit-learn's HDBSCAN, DBCV from an independent NumPy
//! implementation building each cluster's MST with Prim's algorithm from
//! the cluster's first point, first index winning ties) on a fixed blob
//! dataset.

use std::collections::BTreeMap;

use serde::Deserialize;
use spark_core::cluster::{dbcv_score, evaluate, hdbscan, ClusterConfig, HdbscanParams, Reducer, SearchSpace, TuneParams, NOISE};

#[derive(Deserialize)]
struct Case {
    min_cluster_size: usize,
    min_samples: usize,
    labels: Vec<i64>,
    dbcv: Option<f64>,
}

#[derive(Deserialize)]
struct Fixture {
    points: Vec<Vec<f64>>,
    truth: Vec<i64>,
    truth_dbcv: f64,
    cases: Vec<Case>,
}

fn fixture() -> Fixture {
    serde_json::from_str(include_str!("fixtures/hdbscan_blobs.json")).unwrap()
}

/// Same partition up to renaming of cluster ids, with noise fixed.
fn same_partition(a: &[i64], b: &[i64]) -> bool {
    let mut fwd = BTreeMap::new();
    let mut back = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        if (x == NOISE) != (y == NOISE) {
            return false;
        }
        if x == NOISE {
            continue;
        }
        if *fwd.entry(x).or_insert(y) != y || *back.entry(y).or_insert(x) != x {
            return false;
        }
    }
    true
}

#[test]
fn labels_match_reference_implementation() {
    let f = fixture();
    for c in &f.cases {
        let params = HdbscanParams { min_cluster_size: c.min_cluster_size, min_samples: c.min_samples, allow_single_cluster: false };
        let labels = hdbscan(&f.points, &params).unwrap();
        assert!(same_partition(&labels, &c.labels), "mcs={} ms={}: {labels:?} vs {:?}", c.min_cluster_size, c.min_samples, c.labels);
    }
}

#[test]
fn dbcv_matches_reference_implementation() {
    let f = fixture();
    let t = dbcv_score(&f.points, &f.truth).unwrap();
    assert!((t - f.truth_dbcv).abs() < 1e-9, "{t} vs {}", f.truth_dbcv);
    for c in &f.cases {
        let s = dbcv_score(&f.points, &c.labels);
        match (s, c.dbcv) {
            (Some(a), Some(b)) => assert!((a - b).abs() < 1e-9, "{a} vs {b}"),
            (a, b) => assert_eq!(a, b),
        }
    }
}

#[test]
fn tuner_prefers_blob_recovering_parameters() {
    // Over this space only min_cluster_size 10 can recover the three blobs;
    // 60 puts everything in one cluster or noise (undefined DBCV).
    let f = fixture();
    let space = SearchSpace { n_neighbors: vec![5], n_components: vec![2], min_cluster_size: vec![10, 60], min_samples: vec![5, 30, 40] };
    let cfg = ClusterConfig { reducer: Reducer::Pca, ..Default::default() };
    let mut scores = BTreeMap::new();
    for p in space.all() {
        scores.insert(p, evaluate(&f.points, &p, &cfg).unwrap().1);
    }
    let r = spark_core::cluster::tune(&space, space.size(), 3, |p| Ok(evaluate(&f.points, p, &cfg)?.1)).unwrap();
    assert_eq!(r.best.min_cluster_size, 10);
    let (labels, _) = evaluate(&f.points, &r.best, &cfg).unwrap();
    let n_clusters = labels.iter().filter(|&&l| l >= 0).collect::<std::collections::BTreeSet<_>>().len();
    assert_eq!(n_clusters, 3);
    assert!(scores[&TuneParams { n_neighbors: 5, n_components: 2, min_cluster_size: 60, min_samples: 30 }].is_none());
}
