//! One error type for the whole crate; variants map onto the failure
//! surfaces callers actually branch on (bad arguments, bad bytes, bad math).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on arguments or configuration was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A byte stream (container, image, voxel grid) failed validation.
    #[error("format error: {0}")]
    Format(String),

    /// A computation produced NaN or infinity where a finite value is required.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// A linear system's active set lost numerical rank.
    #[error("rank-deficient system: {0}")]
    RankDeficient(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}
