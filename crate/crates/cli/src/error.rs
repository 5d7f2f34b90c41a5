use std::path::PathBuf;

use thiserror::Error;

/// Process exit code when every asserted check passed.
pub const EXIT_PASS: i32 = 0;
/// At least one check failed, or the report broke its own invariants.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// The scenario or a referenced input could not be read or understood.
pub const EXIT_INPUT: i32 = 2;
/// The computation itself was rejected by the library.
pub const EXIT_COMPUTE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("scenario: {0}")]
    Scenario(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("report: {0}")]
    Report(String),

    #[error(transparent)]
    Core(#[from] entcat_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Scenario(_) | CliError::Io { .. } => EXIT_INPUT,
            CliError::Report(_) => EXIT_CHECK_FAILED,
            // unreadable state or protocol files are input problems too
            CliError::Core(entcat_core::Error::Parse(_) | entcat_core::Error::Io(_)) => EXIT_INPUT,
            CliError::Core(_) => EXIT_COMPUTE,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
