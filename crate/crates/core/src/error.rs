use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QError {
    #[error("q must lie in (0,1), got {0}")]
    InvalidQ(f64),
    #[error("invalid grid range: n_low {n_low} > n_high {n_high}")]
    InvalidRange { n_low: i64, n_high: i64 },
    #[error("alpha + beta must exceed -1, got {0}")]
    InvalidParams(f64),
    #[error("degenerate parameter: denominator factor {0:e} is numerically zero")]
    Degenerate(f64),
    #[error("series did not converge within {0} terms")]
    Truncation(usize),
    #[error("non-finite value in {0}")]
    Divergence(String),
    #[error("point {0} is not on the grid")]
    OffGrid(f64),
    #[error("support overflow: {0}")]
    SupportOverflow(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("undefined ratio: {0}")]
    ZeroInput(String),
    #[error("grid too small: {0}")]
    GridTooSmall(String),
    #[error("not admissible: {0}")]
    NotAdmissible(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, QError>;
