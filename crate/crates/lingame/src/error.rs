//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The parameter vector sits on a decision boundary (tied best arm,
    /// arm mean exactly at the threshold level) where no unique answer exists.
    #[error("degenerate parameter: {0}")]
    DegenerateParameter(String),

    #[error("infeasible halfspace: {0}")]
    InfeasibleHalfspace(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A cross-check that should hold up to solver tolerance failed.
    #[error("internal consistency: {0}")]
    InternalConsistency(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
