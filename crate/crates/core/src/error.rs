use thiserror::Error;

/// Errors raised by scenario construction, channel algebra and precoding.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("distance must be positive, got {0} m")]
    NonPositiveDistance(f64),

    #[error("bandwidth must be positive, got {0} Hz")]
    NonPositiveBandwidth(f64),

    #[error("negative Rician factor {0}")]
    NegativeRicianFactor(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("channel matrix is rank deficient ({0})")]
    Singular(String),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("feedback index s = {s} outside 1..={m}")]
    FeedbackOutOfRange { s: usize, m: usize },

    #[error("failed to parse config: {0}")]
    Parse(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
