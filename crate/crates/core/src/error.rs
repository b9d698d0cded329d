use thiserror::Error;

use crate::dataset::FormatError;
use crate::encoder::EncodeError;
use crate::gridworld::MapError;
use crate::kv::KvError;
use crate::nn::NnError;
use crate::planner::PlanError;
use crate::recognizer::RecognizerError;

/// Top-level error, one variant per subsystem.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Recognizer(#[from] RecognizerError),
    #[error(transparent)]
    Config(#[from] KvError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// Short machine-parsable category, printed by the CLI on failure.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Map(_) => "map",
            Error::Plan(_) => "plan",
            Error::Encode(_) => "encode",
            Error::Format(_) => "format",
            Error::Nn(_) => "nn",
            Error::Recognizer(_) => "recognizer",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
            Error::Usage(_) => "usage",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
