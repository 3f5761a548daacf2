use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A documented precondition of an operation did not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An internal invariant broke. Indicates a bug, not bad input.
    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
