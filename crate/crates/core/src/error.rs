use thiserror::Error;

use crate::search::SearchResult;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not positive semi-definite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("decomposition failed: {0}")]
    Decomposition(&'static str),

    #[error("measurement noise covariance of sensor {sensor} at step {step} is not positive definite")]
    SingularNoise { sensor: usize, step: usize },

    #[error("covariance propagation failed at step {step}")]
    Propagation { step: usize },

    #[error("bounding matrix failed domination check after {retries} inflation rounds")]
    BoundVerification { retries: usize },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid search options: {0}")]
    InvalidOptions(String),

    #[error("instance too large: {size} exceeds limit {limit}")]
    InstanceTooLarge { size: u128, limit: u64 },

    #[error("no schedule satisfies the budget constraint")]
    Infeasible,

    #[error("node limit {limit} exceeded")]
    NodeLimit {
        limit: u64,
        /// Best complete schedule found before the limit hit, if any.
        best: Option<Box<SearchResult>>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
