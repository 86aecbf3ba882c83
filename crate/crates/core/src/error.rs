use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("horizon too large: n*t = {0} exceeds 700")]
    HorizonTooLarge(f64),

    #[error("embedding not PSD: min eigenvalue {min} vs max {max}")]
    EmbeddingNotPsd { min: f64, max: f64 },

    #[error("covariance matrix not positive definite (jitter cap {cap:e} exceeded)")]
    NotPositiveDefinite { cap: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("transform required for custom test function")]
    TransformRequired,

    #[error("integral diverges at 0 unless fhat(0)=0 (mass = {0})")]
    NonzeroMass(f64),

    #[error("limit law moment-determinate but no named sampler (lambda = {0})")]
    NoSampler(f64),

    #[error("eigen-solver failure")]
    EigenFailure,

    #[error("node {0} not present in the sampled grid")]
    NodeNotFound(f64),

    #[error("quadrature did not converge (estimate {estimate}, error {error:e})")]
    Quadrature { estimate: f64, error: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
