use std::io;
use std::path::PathBuf;

use smdo_core::ScenarioError;

/// Failure of a command, mapped onto the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid scenario: {0}")]
    Scenario(#[from] ScenarioError),
    #[error("{0}")]
    Core(#[from] smdo_core::Error),
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("degenerate baseline: {0}")]
    DegenerateBaseline(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Scenario(_) | Self::Core(_) => 2,
            Self::Io { .. } => 3,
            Self::DegenerateBaseline(_) => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}
