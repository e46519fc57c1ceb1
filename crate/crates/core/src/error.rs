use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NumericalFailure(_) => 3,
            _ => 2,
        }
    }
}
