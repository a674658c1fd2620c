use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension must be positive")]
    ZeroDimension,

    #[error("matrix is singular or too ill-conditioned to invert")]
    SingularMatrix,

    #[error("operation undefined for the zero bracket")]
    ZeroBracket,

    #[error("bracket is not nilpotent")]
    NotNilpotent,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid Jordan type: {0}")]
    InvalidJordanType(String),

    #[error("input is not a nilpotent soliton (residual {residual:.3e})")]
    NotASoliton { residual: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown example `{0}`")]
    UnknownExample(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
