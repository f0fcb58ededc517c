use std::path::PathBuf;

use thiserror::Error;

use crate::space::encoding::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("objective kind mismatch: expected {expected}, found {found}")]
    ObjectiveMismatch { expected: String, found: String },

    #[error("search space admits no valid value: {0}")]
    EmptySpace(String),

    #[error("mutation failed after {attempts} attempts: {reason}")]
    Mutation { attempts: usize, reason: String },

    #[error("schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("journal corrupt at line {line}: {message}")]
    JournalCorrupt { line: usize, message: String },

    #[error("journal config hash mismatch; differing keys: {}", .differing.join(", "))]
    ConfigMismatch { differing: Vec<String> },

    #[error("analysis error: {0}")]
    Analysis(String),

    #[error("evaluator error: {0}")]
    Evaluator(String),

    #[error("aborted after {0} consecutive evaluation failures")]
    TooManyFailures(usize),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
