use thiserror::Error;

pub type Result<T> = std::result::Result<T, FsmError>;

#[derive(Debug, Error)]
pub enum FsmError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not converge: value {value:.6e}, error estimate {error:.3e}")]
    Quadrature { value: f64, error: f64 },

    #[error("unknown kernel '{name}'; available: {available}")]
    UnknownKernel { name: String, available: String },

    #[error("malformed input at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(FsmError::InvalidArgument(msg.into()))
}
