use std::path::PathBuf;

/// Errors shared across the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Two points coincide (or are otherwise degenerate) where a
    /// distance or angle is required.
    #[error("undefined geometry: {0}")]
    UndefinedGeometry(String),

    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A matrix or table has a shape that does not match its companions.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A solver would exceed its configured resource budget.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// A loaded file failed validation; `path` is the JSON field path.
    #[error("invalid field `{path}`: {message}")]
    Validation { path: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }
}
