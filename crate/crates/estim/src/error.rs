//! Error taxonomy mapped to process exit codes.

use std::fmt;

/// Exit codes: usage 1, input validation 2, runtime 3 (0 is success).
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(anyhow::Error),
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> CliError {
        CliError::Usage(msg.into())
    }

    pub fn input(err: impl Into<anyhow::Error>) -> CliError {
        CliError::Input(err.into())
    }

    pub fn runtime(err: impl Into<anyhow::Error>) -> CliError {
        CliError::Runtime(err.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Input(err) | CliError::Runtime(err) => write!(f, "{err:#}"),
        }
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;
