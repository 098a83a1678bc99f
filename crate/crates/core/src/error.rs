use thiserror::Error;

/// Error type shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("exponent p = {0} outside the supported range {1}")]
    BadExponent(f64, &'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{0} requires a nonzero vector")]
    ZeroVector(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("root bracketing failed: {0}")]
    Bracket(String),

    #[error("solver did not converge: {context} (residual {residual:.3e} after {iterations} iterations)")]
    NonConvergence {
        context: String,
        residual: f64,
        iterations: usize,
    },

    #[error("guaranteed bound violated: {0}")]
    BoundViolation(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
