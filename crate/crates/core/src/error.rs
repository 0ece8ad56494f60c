use thiserror::Error;

/// Errors raised anywhere in the simulation stack.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate detuning: cavity frequency equals the magnon/qubit frequency")]
    DegenerateDetuning,

    #[error("parametric coupling undefined: second drive strength is zero")]
    ChiUndefined,

    #[error("singular denominator: delta1^2 equals Omega2^2")]
    SingularDenominator,

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("integrator did not converge after {halvings} step halvings (residual {residual:.3e})")]
    NonConvergence { halvings: usize, residual: f64 },

    #[error("Fock truncation too small: {0}")]
    Truncation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
