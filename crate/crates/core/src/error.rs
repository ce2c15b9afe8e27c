use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A delimited input row could not be decoded.
    #[error("line {line}: invalid `{field}`: {message}")]
    Parse {
        line: u64,
        field: String,
        message: String,
    },

    /// Input violated a documented precondition or invariant.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Configuration document is malformed or inconsistent.
    #[error("config: {0}")]
    Config(String),

    #[error("missing input file: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    /// Wraps an error with the pipeline stage that produced it.
    #[error("[{stage}] {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn parse(line: u64, field: &str, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        }
    }

    /// True for errors caused by bad configuration or inputs rather than a
    /// failure while running an otherwise valid job.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Parse { .. } | Error::Invalid(_) | Error::Config(_) | Error::MissingFile(_) => true,
            Error::Stage { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}
