use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A model or configuration failed validation; `field` names the offending entry.
    #[error("validation failed at `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("degenerate measure: {0}")]
    DegenerateMeasure(String),

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("state space too large to enumerate: {configurations} configurations exceeds limit {limit}")]
    SizeLimit { configurations: f64, limit: f64 },

    #[error("invalid resampling weight {value} at walker {index}")]
    Weight { index: usize, value: f64 },

    #[error("out-of-sequence record: expected step {expected}, got {got}")]
    Sequencing { expected: u64, got: u64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no reference value available: {0}")]
    NoReference(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("replication {replication_index} (master seed {master_seed}) failed: {source}")]
    Replication {
        master_seed: u64,
        replication_index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed record dump at line {line}: {message}")]
    RecordFormat { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input (models, configs) rather than runtime failure.
    pub fn is_configuration(&self) -> bool {
        match self {
            Error::Validation { .. } | Error::InvalidArgument(_) | Error::Json(_) => true,
            Error::Replication { source, .. } => source.is_configuration(),
            _ => false,
        }
    }
}
