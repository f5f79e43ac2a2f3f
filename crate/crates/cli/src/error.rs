use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] cocycle_lab::Error),
    #[error("{path}: {message}")]
    File { path: String, message: String },
}

impl CliError {
    /// 3 when a quantity could not be resolved within the precision cap, else 2.
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Lib(cocycle_lab::Error::PrecisionExhausted { .. } | cocycle_lab::Error::IndexBeyondSpec { .. }) => {
                ExitCode::from(3)
            }
            _ => ExitCode::from(2),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
