use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("form degree error: {0}")]
    Degree(String),
    #[error("linear solver breakdown: {0}")]
    LinearSolve(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed container: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
