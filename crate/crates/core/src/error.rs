use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("invalid parameter `{field}`: {reason}")]
    Parameter { field: &'static str, reason: String },

    /// Inputs that must share a grid (or be nested, aligned, ...) do not.
    #[error("structural mismatch: {0}")]
    Structure(String),

    /// The operation needs a nonempty domain.
    #[error("domain is empty")]
    EmptyDomain,

    /// The dense assembly budget would be exceeded.
    #[error("grid with {cells} cells exceeds the dense budget of {budget}")]
    Budget { cells: usize, budget: usize },

    /// An iterative method stopped before meeting its tolerance.
    #[error("{method} did not converge after {iterations} iterations (achieved {achieved:.3e}, wanted {wanted:.3e})")]
    NoConvergence {
        method: &'static str,
        iterations: usize,
        achieved: f64,
        wanted: f64,
    },

    /// A matrix that must be positive definite is not.
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    /// No lattice shift produces a nonempty intersection.
    #[error("no lattice shift gives a nonempty intersection")]
    NoOverlap,

    /// A mathematical inequality checked at runtime failed.
    #[error("invariant `{name}` violated: {detail}")]
    Invariant { name: &'static str, detail: String },

    /// The input does not meet a documented precondition.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Parse failure for masks or functional expressions.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Error {
    Error::Parameter {
        field,
        reason: reason.into(),
    }
}
