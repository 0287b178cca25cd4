use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Crate-wide error type. Every failure carries enough context to name the
/// offending field, file, or row.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {message}")]
    InvalidParams { field: String, message: String },

    #[error("invalid config field `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("no dropout intercept reaches target {target}; attainable range is [{lo:e}, {hi:e}]")]
    NoSolution { target: f64, lo: f64, hi: f64 },

    #[error("record {index}: y2 must be present exactly when m2 = 0")]
    MalformedRecord { index: usize },

    #[error("{n_failed} of {n_resamples} bootstrap resamples produced no estimate (limit is 10%)")]
    TooManyFailures { n_failed: usize, n_resamples: usize },

    #[error("schema error in {path}: {message}")]
    Schema { path: String, message: String },

    #[error("{path}, row {row}: {message}")]
    Row { path: String, row: usize, message: String },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("thread pool: {0}")]
    ThreadPool(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code for the CLI: 2 for I/O failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            _ => 1,
        }
    }

    pub(crate) fn invalid(field: &str, message: impl Into<String>) -> Self {
        Error::InvalidParams { field: field.to_string(), message: message.into() }
    }

    pub(crate) fn validation(field: &str, message: impl Into<String>) -> Self {
        Error::Validation { field: field.to_string(), message: message.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
