use std::path::PathBuf;

use thiserror::Error;

/// Failure of a subcommand, mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("no accepted rangefinder readings beyond the origin; cannot calibrate")]
    NoValidReadings,
    #[error("inconsistent inputs: {0}")]
    Mismatch(String),
    #[error("localization failed: {0}")]
    Pipeline(pipeloc_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Parse { .. } => 3,
            CliError::NoValidReadings => 4,
            CliError::Mismatch(_) => 5,
            CliError::Pipeline(_) | CliError::Io { .. } => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> CliError {
        CliError::Parse { path: path.into(), message: message.to_string() }
    }
}

impl From<pipeloc_core::Error> for CliError {
    fn from(e: pipeloc_core::Error) -> Self {
        use pipeloc_core::Error as E;
        match e {
            E::NoValidReadings => CliError::NoValidReadings,
            E::InvalidConfig { .. } | E::BlocksExceedPipe { .. } | E::NonPositiveCoefficient(_) => {
                CliError::Config(e.to_string())
            }
            E::MismatchedLengths { .. } | E::TimestampOutOfRange { .. } => CliError::Mismatch(e.to_string()),
            other => CliError::Pipeline(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
