use std::path::PathBuf;

use thiserror::Error;
use zeno_core::ZenoError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical error: {0}")]
    Numerical(#[source] ZenoError),

    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn config(e: impl std::fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::CheckFailed(_) => 4,
            CliError::Io { .. } => 1,
        }
    }
}

/// Bad parameters surfacing from the library count as configuration errors;
/// everything else is a numerical failure.
impl From<ZenoError> for CliError {
    fn from(e: ZenoError) -> Self {
        match e {
            ZenoError::Invalid(_) | ZenoError::Domain(_) | ZenoError::Parse { .. } | ZenoError::Coverage { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Numerical(other),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
