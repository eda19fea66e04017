use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid filtration tree: {0}")]
    InvalidTree(String),

    #[error("invalid payoffs: {0}")]
    InvalidPayoff(String),

    #[error("invalid generating process: {0}")]
    InvalidGenerating(String),

    #[error("time index {index} out of range for a path of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("stopping-rule enumeration exceeds the cap of {cap}")]
    EnumerationCapExceeded { cap: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("explicit scheme violates the stability bound: dt = {dt:e} > {bound:e}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("expression parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
