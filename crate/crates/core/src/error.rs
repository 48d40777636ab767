use thiserror::Error;

use crate::stats::quadrature::QuadratureError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("{name} = {value} is out of range: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("length mismatch: {left_name} has {left} entries, {right_name} has {right}")]
    LengthMismatch {
        left_name: &'static str,
        left: usize,
        right_name: &'static str,
        right: usize,
    },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    /// Relative errors are undefined when the estimated mean is not positive.
    #[error("relative error undefined for non-positive mean {mean}")]
    UndefinedRelativeError { mean: f64 },

    #[error("sample improvement undefined: enhanced error is zero")]
    ZeroEnhancedError,

    #[error(transparent)]
    Quadrature(#[from] QuadratureError),

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            reason,
        }
    }
}
