use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn config(field: &str, msg: impl std::fmt::Display) -> Self {
        CliError::Config(format!("{field}: {msg}"))
    }

    /// Attach the config block a core error came from.
    pub fn from_core(block: &str, e: eprsim::Error) -> Self {
        if e.is_numerical() {
            return CliError::Numerical(e.to_string());
        }
        match &e {
            eprsim::Error::InvalidParameter { name, reason } => CliError::Config(format!("{block}.{name}: {reason}")),
            _ => CliError::Config(format!("{block}: {e}")),
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Numerical(_) => ExitCode::from(3),
            CliError::Io(_) => ExitCode::from(1),
        }
    }
}
