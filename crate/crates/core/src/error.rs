use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("root finder did not converge after {iterations} iterations (residual {residual:e} A)")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("Newton iteration diverged at time step {step} (max update {update:e} V)")]
    NewtonDivergence { step: usize, update: f64 },

    #[error("trace too short: need {needed} samples after settling, have {available}")]
    WindowTooShort { needed: usize, available: usize },

    #[error("quadrature batch is not normalized")]
    NotNormalized,

    #[error("degenerate batch: {0} repetitions (need at least 2)")]
    DegenerateBatch(usize),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("non-positive variance {value:e} on diagonal entry {index}")]
    NonPositiveVariance { index: usize, value: f64 },

    #[error("partially transposed matrix has complex symplectic spectrum (violation {violation:e})")]
    ComplexEigenvalue { violation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("fit diverged after {iterations} iterations (residual norm {residual_norm:e})")]
    FitDivergence {
        iterations: usize,
        residual_norm: f64,
        last: [f64; 3],
    },

    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),

    #[error("I/O: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
