use nonspread_core::Error;
use thiserror::Error as ThisError;

/// Exit codes of the `nonspread` binary.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const VERDICT: i32 = 2;
    pub const ESCAPE: i32 = 3;
    pub const SELFCHECK: i32 = 4;
}

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::SupportEscape(_) | Error::DirichletViolation { .. }) => exit::ESCAPE,
            CliError::Core(Error::UnsupportedPotential(_)) => exit::VERDICT,
            _ => exit::CONFIG,
        }
    }
}
