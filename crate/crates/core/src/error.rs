use thiserror::Error;

/// Errors raised by the numerical laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("infrared divergence: {0}")]
    InfraredDivergence(String),

    #[error("target density {target} is not above the infrared density {infrared}")]
    UnsolvableDensity { target: f64, infrared: f64 },

    #[error("no sign change of the target function on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("tensor dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("root finding failed: {0}")]
    NoConvergence(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    /// Numerical divergences (as opposed to bad input).
    pub fn is_divergence(&self) -> bool {
        matches!(
            self,
            Error::InfraredDivergence(_) | Error::Quadrature(_) | Error::NoConvergence(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
