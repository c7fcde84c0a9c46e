//! C-event pool construction: frequency filter, embedding, reduction,
//! density clustering tuned on DBCV, and noise removal.

pub mod dbcv;
pub mod hdbscan;
pub mod reduce;
pub mod tune;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embed::TextEmbedder;
use crate::error::{Error, Result};
use crate::kg::{AlignmentResult, CEvent, KgStore};

pub use dbcv::dbcv_score;
pub use hdbscan::{hdbscan, HdbscanParams, NOISE};
pub use reduce::{reduce_dims, Points, ReduceParams, Reducer};
pub use tune::{tune, Evaluation, SearchSpace, TuneParams, TuneResult};

/// Events listed among the top alignments at least `min_count` times, in id
/// order, with `frequency` set.
pub fn frequency_filter(alignments: &[AlignmentResult], kg: &KgStore, min_count: usize) -> Result<Vec<CEvent>> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for a in alignments {
        for id in &a.top3 {
            *counts.entry(id.as_str()).or_default() += 1;
        }
    }
    let out: Vec<CEvent> = counts
        .into_iter()
        .filter(|(_, c)| *c >= min_count)
        .filter_map(|(id, c)| {
            kg.events.get(id).map(|e| CEvent { frequency: c, ..e.clone() })
        })
        .collect();
    if out.is_empty() {
        return Err(Error::NoFrequentEvents { min_count });
    }
    Ok(out)
}

/// One row per event, in input order.
pub fn embed_events(events: &[CEvent], embedder: &dyn TextEmbedder) -> Result<Points> {
    let dim = embedder.dim();
    events
        .iter()
        .enumerate()
        .map(|(row, e)| {
            let v = embedder.embed_text(&e.text);
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: v.len(), row });
            }
            Ok(v)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DbcvSpace {
    #[default]
    Reduced,
    Original,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub reducer: Reducer,
    pub min_dist: f64,
    pub dbcv_space: DbcvSpace,
    pub budget: usize,
    pub seed: u64,
    pub allow_single_cluster: bool,
    pub n_neighbors: (usize, usize),
    pub n_components: (usize, usize),
    pub min_cluster_size: (usize, usize),
    pub min_samples: (usize, usize),
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            reducer: Reducer::Umap,
            min_dist: 0.1,
            dbcv_space: DbcvSpace::Reduced,
            budget: 50,
            seed: 42,
            allow_single_cluster: false,
            n_neighbors: (5, 50),
            n_components: (2, 10),
            min_cluster_size: (5, 50),
            min_samples: (1, 20),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub event_ids: Vec<String>,
    pub embedding_dim: usize,
    pub reduced_dim: usize,
    pub labels: BTreeMap<String, i64>,
    pub hyperparams: BTreeMap<String, f64>,
    /// DBCV of `labels`; −1 when undefined (fewer than two clusters).
    pub dbcv: f64,
    pub rng_seed: u64,
}

impl ClusterModel {
    pub fn n_clusters(&self) -> usize {
        self.labels.values().filter(|&&l| l != NOISE).collect::<std::collections::BTreeSet<_>>().len()
    }
}

/// Labels and DBCV for one parameter setting.
pub fn evaluate(points: &[Vec<f64>], p: &TuneParams, cfg: &ClusterConfig) -> Result<(Vec<i64>, Option<f64>)> {
    let reduced = reduce_dims(
        points,
        &ReduceParams { n_neighbors: p.n_neighbors, min_dist: cfg.min_dist, n_components: p.n_components },
        cfg.seed,
        cfg.reducer,
    )?;
    let labels = hdbscan(
        &reduced,
        &HdbscanParams {
            min_cluster_size: p.min_cluster_size,
            min_samples: p.min_samples,
            allow_single_cluster: cfg.allow_single_cluster,
        },
    )?;
    let space = match cfg.dbcv_space {
        DbcvSpace::Reduced => &reduced,
        DbcvSpace::Original => points,
    };
    let score = dbcv_score(space, &labels);
    Ok((labels, score))
}

/// Tunes on DBCV and returns the model refit at the best parameters.
pub fn cluster_events(event_ids: &[String], points: &[Vec<f64>], cfg: &ClusterConfig) -> Result<(ClusterModel, TuneResult)> {
    let dim = points.first().map_or(0, Vec::len);
    let space = SearchSpace::from_ranges(cfg.n_neighbors, cfg.n_components, cfg.min_cluster_size, cfg.min_samples, points.len(), dim);
    let budget = cfg.budget.min(space.size()).max(5);
    let result = tune(&space, budget, cfg.seed, |p| evaluate(points, p, cfg).map(|(_, s)| s))?;
    let (labels, score) = evaluate(points, &result.best, cfg)?;
    let best = result.best;
    let model = ClusterModel {
        event_ids: event_ids.to_vec(),
        embedding_dim: dim,
        reduced_dim: best.n_components,
        labels: event_ids.iter().cloned().zip(labels).collect(),
        hyperparams: BTreeMap::from([
            ("n_neighbors".to_string(), best.n_neighbors as f64),
            ("n_components".to_string(), best.n_components as f64),
            ("min_cluster_size".to_string(), best.min_cluster_size as f64),
            ("min_samples".to_string(), best.min_samples as f64),
            ("min_dist".to_string(), cfg.min_dist),
        ]),
        dbcv: score.unwrap_or(-1.0),
        rng_seed: cfg.seed,
    };
    Ok((model, result))
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DomainAssignment {
    pub clusters: BTreeMap<String, i64>,
    pub names: BTreeMap<i64, String>,
}

impl DomainAssignment {
    pub fn name_of(&self, cluster: i64) -> String {
        self.names.get(&cluster).cloned().unwrap_or_else(|| format!("cluster_{cluster}"))
    }
}

/// Removes noise events; fails when nothing remains.
pub fn drop_noise(labels: &BTreeMap<String, i64>, names: &BTreeMap<i64, String>) -> Result<DomainAssignment> {
    let clusters: BTreeMap<String, i64> = labels.iter().filter(|(_, &l)| l != NOISE).map(|(k, &l)| (k.clone(), l)).collect();
    if clusters.is_empty() {
        return Err(Error::AllNoise);
    }
    Ok(DomainAssignment { clusters, names: names.clone() })
}

pub fn write_clusters_csv(labels: &BTreeMap<String, i64>, path: &Path) -> Result<()> {
    let mut s = String::from("event_id,cluster_id\n");
    for (id, l) in labels {
        s.push_str(&format!("{id},{l}\n"));
    }
    File::create(path).and_then(|mut f| f.write_all(s.as_bytes())).map_err(|e| Error::io(path, e))
}

pub fn read_clusters_csv(path: &Path) -> Result<BTreeMap<String, i64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let (id, l) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("{}:{}: expected event_id,cluster_id", path.display(), n + 1)))?;
        let l: i64 = l.trim().parse().map_err(|_| Error::Parse(format!("{}:{}: bad cluster id", path.display(), n + 1)))?;
        out.insert(id.to_string(), l);
    }
    Ok(out)
}

pub fn write_tuning_log(history: &[Evaluation], path: &Path) -> Result<()> {
    let mut s = String::from("eval_index,n_neighbors,n_components,min_cluster_size,min_samples,dbcv\n");
    for e in history {
        let p = e.params;
        let score = e.score.map_or_else(|| "undefined".to_string(), |v| format!("{v}"));
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            e.index, p.n_neighbors, p.n_components, p.min_cluster_size, p.min_samples, score
        ));
    }
    File::create(path).and_then(|mut f| f.write_all(s.as_bytes())).map_err(|e| Error::io(path, e))
}
