//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by simulator components.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates an operation precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A persisted artifact (LUT, curves CSV, config) could not be parsed.
    #[error("malformed file {path}: {reason}")]
    MalformedFile { path: String, reason: String },

    /// A persisted artifact declares a format version this build does not read.
    #[error("unsupported format version in {path}: found {found}, expected {expected}")]
    VersionMismatch {
        path: String,
        found: String,
        expected: String,
    },

    /// A required per-CQI input (curve, threshold, MI table) is missing.
    #[error("missing data for CQI {0}")]
    MissingCqi(u8),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
