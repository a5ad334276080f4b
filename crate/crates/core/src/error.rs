use thiserror::Error;

/// Errors raised by the evaluation engine and its supporting modules.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed textual input (surface, class, or tangency DSL).
    #[error("parse error: {0}")]
    Parse(String),

    /// Input that parses but violates a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// An internal consistency check failed. Always a bug.
    #[error("internal assertion failed: {0}")]
    Internal(String),

    #[error("cache version mismatch: expected `{expected}`, found `{found}`")]
    CacheVersion { expected: String, found: String },

    #[error("malformed cache record at line {line}: {reason}")]
    CacheRecord { line: usize, reason: String },

    #[error("cache integrity error: {0}")]
    CacheIntegrity(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}
