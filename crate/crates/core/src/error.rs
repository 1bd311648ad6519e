use thiserror::Error;

use crate::quad::QuadError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZenoError {
    /// An argument outside the domain of the function being evaluated.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid construction parameters (spectrum, protocol, grid, ...).
    #[error("invalid parameter: {0}")]
    Invalid(String),

    #[error("{quantity} is not integrable: {source}")]
    Integrability {
        quantity: &'static str,
        #[source]
        source: QuadError,
    },

    #[error("numerical failure in {quantity}: {source}")]
    Numerical {
        quantity: &'static str,
        #[source]
        source: QuadError,
    },

    #[error("incomplete gamma Γ({order}, 0) diverges for non-positive order")]
    Divergence { order: f64 },

    #[error("bath cutoff {omega_max} covers only {covered:.3e} of the spectral weight (need {required:.3e})")]
    Coverage {
        omega_max: f64,
        covered: f64,
        required: f64,
    },

    #[error("amplitude integration lost accuracy: norm drift {drift:.3e} exceeds {limit:.1e}")]
    Accuracy { drift: f64, limit: f64 },

    #[error("rate sweep failed at tau = {tau}: {source}")]
    Sweep {
        tau: f64,
        #[source]
        source: Box<ZenoError>,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl ZenoError {
    pub(crate) fn integrability(quantity: &'static str) -> impl FnOnce(QuadError) -> Self {
        move |source| match source {
            QuadError::Divergent { .. } => ZenoError::Integrability { quantity, source },
            other => ZenoError::Numerical {
                quantity,
                source: other,
            },
        }
    }

    pub(crate) fn numerical(quantity: &'static str) -> impl FnOnce(QuadError) -> Self {
        move |source| ZenoError::Numerical { quantity, source }
    }
}

pub type Result<T, E = ZenoError> = std::result::Result<T, E>;
