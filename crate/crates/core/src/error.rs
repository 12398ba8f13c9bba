use thiserror::Error;

/// Errors raised by measure construction, operators, coverings and harness runs.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length mismatch: {what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-positive mass {value} at atom {index}")]
    NonPositiveMass { index: usize, value: f64 },

    #[error("non-finite value {value} at index {index} in {what}")]
    NonFinite {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("negative weight {value} at atom {index}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("zero weight at atom {index}: dual average undefined for p > 1")]
    ZeroWeight { index: usize },

    #[error("cube has zero mass: {0}")]
    ZeroMassCube(String),

    #[error("no doubling cube found after {halvings} halvings: {reason}")]
    DoublingNotFound { halvings: u32, reason: String },

    #[error("overlap bound {bound} violated: {count} cubes cover point {witness:?}")]
    OverlapViolated {
        bound: usize,
        count: usize,
        witness: Vec<f64>,
    },

    #[error("oracle inconsistency: {0}")]
    OracleInconsistent(String),

    #[error("{0}")]
    Parse(String),

    #[error("node cap exceeded: {count} > {cap}")]
    NodeCapExceeded { count: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
