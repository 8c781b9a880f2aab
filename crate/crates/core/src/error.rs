use thiserror::Error;

/// Errors raised by the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range (len {len})")]
    OutOfRange { index: usize, len: usize },

    #[error("value {value} outside the admissible range of the {model} model")]
    Inadmissible { value: f64, model: &'static str },

    #[error("bound violation: {0}")]
    BoundViolation(String),

    #[error("linear solver failed: {0}")]
    LinearSolver(String),

    #[error("Newton iteration failed at step {step}: {message}")]
    Newton { step: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
