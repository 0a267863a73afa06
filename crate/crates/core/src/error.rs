use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown function `{name}` at byte {pos}")]
    UnknownFunction { name: String, pos: usize },

    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("variable `{0}` bound more than once")]
    DuplicateBinding(String),

    #[error("cannot differentiate {0}")]
    NotDifferentiable(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("{0}")]
    TooLarge(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("singular point of the coordinate chart: {0}")]
    SingularPoint(String),

    #[error("only cartesian coordinates are supported here, got `{0}`")]
    NotCartesian(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
