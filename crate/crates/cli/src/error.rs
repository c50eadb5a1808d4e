use std::path::PathBuf;
use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Model(#[from] qbm_sbs::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{failed} of {total} self-test checks failed")]
    Selftest { failed: usize, total: usize },
}

impl CliError {
    /// 2 for configuration problems, 3 for numerical guards, 4 for a failed
    /// self-test and 1 for IO.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Model(e) if e.is_numerical_guard() => 3,
            CliError::Model(_) => 2,
            CliError::Selftest { .. } => 4,
            CliError::Io { .. } => 1,
        }
    }
}

impl From<&CliError> for ExitCode {
    fn from(e: &CliError) -> Self {
        ExitCode::from(e.exit_code())
    }
}
