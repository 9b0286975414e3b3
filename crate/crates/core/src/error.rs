use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-physical state: smallest symplectic eigenvalue {nu:.3e} at t = {time:.6e}")]
    Unphysical { nu: f64, time: f64 },

    #[error("step size too large: dt * rate = {0:.3e} (must be < 1e-2)")]
    StepTooLarge(f64),

    #[error("truncation too small: tail weight {tail:.3e} at dim {dim}")]
    Truncation { dim: usize, tail: f64 },

    #[error("quadrature did not converge: change {change:.3e} when doubling nodes")]
    Convergence { change: f64 },

    #[error("quadratic form not positive definite (det = {0:.3e})")]
    NotPositiveDefinite(f64),

    #[error("kernel returned {value} outside [0, 1]")]
    KernelOutOfRange { value: f64 },

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
