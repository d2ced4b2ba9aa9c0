use thiserror::Error;

/// Errors raised by the channel, coupling and optimization routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("singular geometry: points {0:?} and {1:?} coincide")]
    SingularGeometry([f64; 3], [f64; 3]),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        actual: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("coupling matrix is ill-conditioned (condition number {condition:.3e})")]
    IllConditionedCoupling { condition: f64 },

    #[error("entry {index} is not unit modulus (|p| = {modulus})")]
    NonUnitModulus { index: usize, modulus: f64 },

    #[error("entry {index} = {value} is outside the feasible set {set}")]
    Infeasible {
        index: usize,
        value: String,
        set: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error(
        "sum rate decreased at iteration {iteration}: {previous} -> {current} (slack {slack})"
    )]
    MonotonicityViolation {
        iteration: usize,
        previous: f64,
        current: f64,
        slack: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dims(rows: usize, cols: usize) -> String {
    format!("{rows}x{cols}")
}
