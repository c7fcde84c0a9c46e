//! Run configuration: a flat `key = value` file, `SPARK_<KEY>` environment
//! overrides and command-line overrides, in increasing precedence.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use spark_core::cluster::{ClusterConfig, DbcvSpace, Reducer};
use spark_core::kg::{AlignConfig, RefineMode};

use crate::CliError;

pub const ENV_PREFIX: &str = "SPARK_";

/// Every accepted key with its default; an empty default means unset.
pub const DEFAULTS: &[(&str, &str)] = &[
    ("corpus_dir", ""),
    ("kg_path", ""),
    ("lexicon_dir", ""),
    ("verdict_patterns", ""),
    ("cluster_names", ""),
    ("out_dir", "spark_out"),
    ("min_words_post", "50"),
    ("min_top_comments", "10"),
    ("min_words_comment", "15"),
    ("tfidf_threshold", "0.5"),
    ("topk_alignments", "3"),
    ("min_event_count", "5"),
    ("sentiment_threshold", "0.05"),
    ("match_threshold", "0.8"),
    ("alpha", "0.05"),
    ("seed", "42"),
    ("parser", "rule"),
    ("embedder", "hash"),
    ("embed_dim", "64"),
    ("scorer", "idf-overlap"),
    ("refine_mode", "near_duplicates"),
    ("reducer", "umap"),
    ("min_dist", "0.1"),
    ("dbcv_space", "reduced"),
    ("tuning_budget", "50"),
    ("n_neighbors", "5-50"),
    ("n_components", "2-10"),
    ("min_cluster_size", "5-50"),
    ("min_samples", "1-20"),
    ("allow_single_cluster", "false"),
    ("exclude_unaligned", "true"),
    ("top_n", "30"),
];

const PATH_KEYS: &[&str] = &["corpus_dir", "kg_path", "lexicon_dir", "verdict_patterns", "cluster_names", "out_dir"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScorerKind {
    IdfOverlap,
    GreedyMatch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Resolved key/value pairs, as recorded in the manifest.
    pub snapshot: BTreeMap<String, String>,
    pub corpus_dir: PathBuf,
    pub kg_path: PathBuf,
    pub lexicon_dir: Option<PathBuf>,
    pub verdict_patterns: Option<PathBuf>,
    pub cluster_names: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub min_words_post: usize,
    pub min_top_comments: usize,
    pub min_words_comment: usize,
    pub topk_alignments: usize,
    pub min_event_count: usize,
    pub sentiment_threshold: f64,
    pub match_threshold: f64,
    pub alpha: f64,
    pub seed: u64,
    pub embed_dim: usize,
    pub scorer: ScorerKind,
    pub align: AlignConfig,
    pub cluster: ClusterConfig,
    pub exclude_unaligned: bool,
    pub top_n: usize,
}

/// Parses `key = value` lines; `#` starts a comment line.
pub fn parse_kv(text: &str, origin: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("{origin}:{}: expected key = value", n + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn check_key(key: &str, origin: &str) -> Result<(), CliError> {
    if DEFAULTS.iter().any(|(k, _)| *k == key) {
        Ok(())
    } else {
        Err(CliError::Config(format!("{origin}: unknown key '{key}'")))
    }
}

/// Layers the sources and validates the result. File paths are relative to
/// the config file; environment and command-line paths to the working
/// directory.
pub fn resolve(
    config_path: Option<&Path>,
    env: &BTreeMap<String, String>,
    cli: &BTreeMap<String, String>,
) -> Result<RunConfig, CliError> {
    let mut values: BTreeMap<String, String> = DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    if let Some(path) = config_path {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for (k, v) in parse_kv(&text, &path.display().to_string())? {
            check_key(&k, &path.display().to_string())?;
            let v = if PATH_KEYS.contains(&k.as_str()) && !v.is_empty() && Path::new(&v).is_relative() {
                base.join(&v).to_string_lossy().into_owned()
            } else {
                v
            };
            values.insert(k, v);
        }
    }
    for (k, v) in env {
        if let Some(key) = k.strip_prefix(ENV_PREFIX) {
            let key = key.to_lowercase();
            // other tools use the prefix too (SPARK_HOME), so unknown names are skipped
            if check_key(&key, "environment").is_err() {
                log::warn!("ignoring environment variable {k}: not a configuration key");
                continue;
            }
            values.insert(key, v.clone());
        }
    }
    for (k, v) in cli {
        check_key(k, "command line")?;
        values.insert(k.clone(), v.clone());
    }
    build(values)
}

/// `SPARK_*` variables from the process environment.
pub fn process_env() -> BTreeMap<String, String> {
    std::env::vars().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect()
}

fn num<T: std::str::FromStr>(v: &BTreeMap<String, String>, key: &str) -> Result<T, CliError> {
    v[key].parse().map_err(|_| CliError::Config(format!("{key}: cannot parse '{}'", v[key])))
}

fn positive_int(v: &BTreeMap<String, String>, key: &str) -> Result<usize, CliError> {
    let x: usize = num(v, key)?;
    if x == 0 {
        return Err(CliError::Config(format!("{key} must be positive")));
    }
    Ok(x)
}

fn positive_float(v: &BTreeMap<String, String>, key: &str) -> Result<f64, CliError> {
    let x: f64 = num(v, key)?;
    if !(x.is_finite() && x > 0.0) {
        return Err(CliError::Config(format!("{key} must be positive, got {x}")));
    }
    Ok(x)
}

fn range(v: &BTreeMap<String, String>, key: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Config(format!("{key}: expected 'lo-hi', got '{}'", v[key]));
    let (lo, hi) = v[key].split_once('-').ok_or_else(bad)?;
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi.trim().parse().map_err(|_| bad())?;
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn flag(v: &BTreeMap<String, String>, key: &str) -> Result<bool, CliError> {
    match v[key].to_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(CliError::Config(format!("{key}: expected true/false, got '{other}'"))),
    }
}

fn existing(v: &BTreeMap<String, String>, key: &str, required: bool) -> Result<Option<PathBuf>, CliError> {
    let s = &v[key];
    if s.is_empty() {
        return if required { Err(CliError::Config(format!("{key} is required"))) } else { Ok(None) };
    }
    let p = PathBuf::from(s);
    if !p.exists() {
        return Err(CliError::Config(format!("{key}: {} does not exist", p.display())));
    }
    Ok(Some(p))
}

fn build(v: BTreeMap<String, String>) -> Result<RunConfig, CliError> {
    let fraction = |key: &str| -> Result<f64, CliError> {
        let x = positive_float(&v, key)?;
        if x > 1.0 {
            return Err(CliError::Config(format!("{key} must be at most 1, got {x}")));
        }
        Ok(x)
    };
    let tfidf_threshold = fraction("tfidf_threshold")?;
    let match_threshold = fraction("match_threshold")?;
    let alpha = fraction("alpha")?;
    let sentiment_threshold = fraction("sentiment_threshold")?;
    let min_dist = positive_float(&v, "min_dist")?;
    let seed: u64 = num(&v, "seed")?;

    if v["parser"] != "rule" {
        return Err(CliError::Config(format!("parser: unknown backend '{}' (available: rule)", v["parser"])));
    }
    if v["embedder"] != "hash" {
        return Err(CliError::Config(format!("embedder: unknown backend '{}' (available: hash)", v["embedder"])));
    }
    let scorer = match v["scorer"].as_str() {
        "idf-overlap" => ScorerKind::IdfOverlap,
        "greedy-match" => ScorerKind::GreedyMatch,
        other => return Err(CliError::Config(format!("scorer: unknown backend '{other}'"))),
    };
    let mode = match v["refine_mode"].as_str() {
        "near_duplicates" => RefineMode::NearDuplicates,
        "instance_similarity" => RefineMode::InstanceSimilarity,
        other => return Err(CliError::Config(format!("refine_mode: unknown mode '{other}'"))),
    };
    let reducer = match v["reducer"].as_str() {
        "umap" => Reducer::Umap,
        "pca" => Reducer::Pca,
        other => return Err(CliError::Config(format!("reducer: unknown method '{other}'"))),
    };
    let dbcv_space = match v["dbcv_space"].as_str() {
        "reduced" => DbcvSpace::Reduced,
        "original" => DbcvSpace::Original,
        other => return Err(CliError::Config(format!("dbcv_space: unknown space '{other}'"))),
    };
    let topk = positive_int(&v, "topk_alignments")?;
    let cluster = ClusterConfig {
        reducer,
        min_dist,
        dbcv_space,
        budget: positive_int(&v, "tuning_budget")?,
        seed,
        allow_single_cluster: flag(&v, "allow_single_cluster")?,
        n_neighbors: range(&v, "n_neighbors")?,
        n_components: range(&v, "n_components")?,
        min_cluster_size: range(&v, "min_cluster_size")?,
        min_samples: range(&v, "min_samples")?,
    };
    if v["out_dir"].is_empty() {
        return Err(CliError::Config("out_dir is required".into()));
    }
    Ok(RunConfig {
        corpus_dir: existing(&v, "corpus_dir", true)?.unwrap_or_default(),
        kg_path: existing(&v, "kg_path", true)?.unwrap_or_default(),
        lexicon_dir: existing(&v, "lexicon_dir", false)?,
        verdict_patterns: existing(&v, "verdict_patterns", false)?,
        cluster_names: existing(&v, "cluster_names", false)?,
        out_dir: PathBuf::from(&v["out_dir"]),
        min_words_post: positive_int(&v, "min_words_post")?,
        min_top_comments: positive_int(&v, "min_top_comments")?,
        min_words_comment: positive_int(&v, "min_words_comment")?,
        topk_alignments: topk,
        min_event_count: positive_int(&v, "min_event_count")?,
        sentiment_threshold,
        match_threshold,
        alpha,
        seed,
        embed_dim: positive_int(&v, "embed_dim")?,
        scorer,
        align: AlignConfig { threshold: tfidf_threshold, top_k: topk, mode },
        cluster,
        exclude_unaligned: flag(&v, "exclude_unaligned")?,
        top_n: positive_int(&v, "top_n")?,
        snapshot: v,
    })
}
