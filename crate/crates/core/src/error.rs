use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("negative entry {value} at ({row}, {col}) in {name}")]
    Negative {
        name: &'static str,
        row: usize,
        col: usize,
        value: f64,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("no words left after filtering (min_df = {min_df})")]
    EmptyVocabulary { min_df: usize },

    #[error("corpus too small for MBN schedule: N = {n}, K = {k} (need N > 2K)")]
    CorpusTooSmall { n: usize, k: usize },

    #[error("eigen-solver failure: {0}")]
    Eigen(String),

    #[error("k-means produced an empty cluster after {attempts} attempts")]
    EmptyCluster { attempts: usize },

    #[error(
        "monotonicity violated at iteration {iteration}: objective rose from {previous} to {current}"
    )]
    MonotonicityViolated {
        iteration: usize,
        previous: f64,
        current: f64,
    },

    #[error("gold labels required")]
    MissingLabels,

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
