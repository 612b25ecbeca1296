use std::path::PathBuf;

use riskplan_core::{AggregationError, SimulationError, ValidationError};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("{}: unsupported format tag {found:?}", path.display())]
    Version { path: PathBuf, found: String },
    #[error("{}: {source}", path.display())]
    Validation {
        path: PathBuf,
        #[source]
        source: ValidationError,
    },
    #[error("scenario not found: {0}")]
    ScenarioNotFound(String),
    #[error("config: {0}")]
    Config(String),
    #[error("no traces found under {}", .0.display())]
    NoTraces(PathBuf),
    #[error("{scenario} ({run}): {source}")]
    Simulation {
        scenario: String,
        run: String,
        #[source]
        source: SimulationError,
    },
    #[error(transparent)]
    Aggregation(#[from] AggregationError),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Self::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// Process exit code; usage errors (2) are reported by the argument parser.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::ScenarioNotFound(_) => 3,
            Error::Parse { .. } | Error::Version { .. } | Error::Validation { .. } => 4,
            Error::Config(_) => 5,
            Error::NoTraces(_) => 6,
            Error::Simulation { .. } => 7,
            Error::Aggregation(_) => 8,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
