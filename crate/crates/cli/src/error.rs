use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable input or an invalid problem.
    #[error("{0}")]
    Validation(String),
    /// The computation itself failed.
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Internal(_) => 2,
        }
    }

    pub fn read(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        CliError::Validation(format!("cannot read {}: {err}", path.display()))
    }

    pub fn write(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        CliError::Internal(format!("cannot write {}: {err}", path.display()))
    }
}

impl From<mp_core::Error> for CliError {
    fn from(e: mp_core::Error) -> Self {
        use mp_core::Error::*;
        match e {
            NotConverged { .. } | Diverged { .. } => CliError::Internal(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn missing(flag: &str) -> CliError {
    CliError::Validation(format!("missing required option --{flag}"))
}

pub(crate) fn unwritable(path: PathBuf) -> impl FnOnce(std::io::Error) -> CliError {
    move |e| CliError::write(&path, e)
}
