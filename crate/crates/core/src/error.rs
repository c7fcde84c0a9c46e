use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {malformed} of {total} lines malformed (lines {lines:?})")]
    TooManyMalformed {
        path: PathBuf,
        malformed: usize,
        total: usize,
        lines: Vec<usize>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("knowledge graph {path} contains no xAttr rows")]
    NoAttributeRows { path: PathBuf },

    #[error("parser failed: {0}")]
    Parse(String),

    #[error("scorer failed: {0}")]
    Scorer(String),

    #[error("need at least {required} rows, got {actual}")]
    TooFewRows { required: usize, actual: usize },

    #[error("embedding dimension mismatch: expected {expected}, got {actual} for row {row}")]
    DimensionMismatch {
        expected: usize,
        actual: usize,
        row: usize,
    },

    #[error("every point was labeled noise")]
    AllNoise,

    #[error("no events reached the minimum frequency of {min_count}")]
    NoFrequentEvents { min_count: usize },

    #[error("hyperparameter search failed: every one of {evaluations} evaluations had an undefined score ({diagnostics})")]
    TuningFailed {
        evaluations: usize,
        diagnostics: String,
    },

    #[error("perfect separation detected (|beta| = {max_abs_beta:.3} after {iterations} iterations)")]
    PerfectSeparation { max_abs_beta: f64, iterations: usize },

    #[error("design matrix is rank deficient; collinear columns: {}", columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("logistic fit did not converge in {max_iter} iterations")]
    NotConverged { max_iter: usize },

    #[error("each response class needs at least one observation")]
    SingleClassResponse,

    #[error("statistic undefined: {0}")]
    Undefined(String),

    #[error("csv error: {0}")]
    Csv(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
