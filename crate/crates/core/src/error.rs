use thiserror::Error;

/// Errors raised by the numerical routines and the file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("resolution mismatch: kernel table has m = {table}, grid has m = {grid}")]
    ResolutionMismatch { table: usize, grid: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("index out of range for `{name}`: {reason}")]
    OutOfRange { name: &'static str, reason: String },

    #[error("invalid set specification: {0}")]
    SetSpec(String),

    #[error("resource guard exceeded: {0}")]
    ResourceGuard(String),

    #[error("construction precondition failed: {0}")]
    Precondition(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
