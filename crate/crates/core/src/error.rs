use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: expected {expected}")]
    Syntax { offset: usize, expected: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("variable `{name}` at offset {offset} is out of range (allowed 1..={max})")]
    IndexOutOfRange {
        name: String,
        offset: usize,
        max: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("second jets lie in different fibers of the double projection (deviation {deviation:e})")]
    FiberMismatch { deviation: f64 },

    #[error("matrix does not lie in the span of the algebra basis (residual {residual:e})")]
    ClosureViolation { residual: f64 },

    #[error("fiber velocity is not tangent to the fiber (residual {residual:e})")]
    NotVertical { residual: f64 },

    #[error("singular matrix")]
    SingularMatrix,

    #[error("invalid Lie algebra: {0}")]
    InvalidAlgebra(String),

    #[error("{what}: independent evaluation routes disagree by {deviation:e}")]
    InternalDisagreement { what: &'static str, deviation: f64 },

    #[error("no structural derivative rule for {0}")]
    DifferentiationUnsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
