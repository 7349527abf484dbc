use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("invalid dataset: {0}")]
    Validation(String),

    #[error("filter selected no items")]
    EmptyResult,

    #[error("invalid bundle: {0}")]
    Bundle(String),

    #[error("checksum mismatch: manifest says {expected}, matrix hashes to {actual}")]
    Checksum { expected: String, actual: String },

    #[error("labels missing from bundle: {}", .0.join(", "))]
    MissingLabels(Vec<String>),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("affinity row {0} is all zero (isolated point)")]
    IsolatedPoint(usize),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
