//! Crate-wide error type.

use thiserror::Error;

/// Errors reported by grid construction, operator algebra and propagation.
#[derive(Debug, Clone, Error)]
pub enum QfeyError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("quadrature failed to reach tolerance {tol:e} (estimated error {estimate:e})")]
    QuadratureNonConvergence { tol: f64, estimate: f64 },
    #[error("operator exponential did not converge within {terms} terms")]
    ExpNonConvergence { terms: usize },
    #[error("formula guard violated: {0}")]
    GuardViolation(String),
    #[error("coefficient cancellation loss exceeds guard ({loss_factor:.1e} x machine epsilon)")]
    CancellationLoss { loss_factor: f64 },
    #[error("operator is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("initial state leaks the periodic box (estimated outside mass {mass:e})")]
    BoxLeak { mass: f64 },
    #[error("propagation failed at subdivision n = {n}: {source}")]
    Propagation {
        n: usize,
        source: Box<QfeyError>,
    },
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, QfeyError>;
