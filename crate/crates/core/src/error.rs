use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported dimension {0}; expected 2 or 3")]
    UnsupportedDimension(usize),
    #[error("degenerate simplex (volume {0:e})")]
    Degenerate(f64),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix is not positive definite (pivot {pivot}, value {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("singular system: {0}")]
    Singular(String),
    #[error("iteration did not converge after {iterations} steps (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("grading budget exceeded: {elements} elements would exceed the cap of {cap}")]
    BudgetExceeded { elements: usize, cap: usize },
    #[error("Gram matrix too ill-conditioned (estimate {0:e})")]
    IllConditioned(f64),
    #[error("operator {0} needs a Helmholtz split of its argument")]
    MissingSplit(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
}
