use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("beta must exceed pi, got {0}")]
    InvalidBeta(f64),
    #[error("exponent p = {0} outside the admissible range")]
    InvalidExponent(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grids do not match: {0}")]
    GridMismatch(String),
    #[error("singular point: {0}")]
    SingularPoint(String),
    #[error("argument on the branch cut: {0}")]
    BranchCut(String),
    #[error("contour abscissa c = {c} outside the strip ({lower}, {upper})")]
    OutOfStrip { c: f64, lower: f64, upper: f64 },
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("fit needs at least {needed} positive samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("non-positive sample {value} at index {index}")]
    NonPositiveSample { index: usize, value: f64 },
}
