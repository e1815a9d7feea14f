use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("configuration error: {0}")]
    Configuration(String),

    /// The line search rejected a step with `L` above `tau * (L_f + c)`. The
    /// acceptance guarantee makes this unreachable when `L_f` is a true
    /// Lipschitz constant of the gradient.
    #[error("line search failed: L = {l:.3e} exceeded cap {cap:.3e} after {tries} tries")]
    LineSearch { l: f64, cap: f64, tries: usize },

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },
}
