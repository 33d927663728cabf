use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Domain(String),

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("{0}")]
    Lookup(String),

    #[error("{0}")]
    Build(String),

    #[error("{0}")]
    Mining(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(source_name: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            line,
            message: message.into(),
        }
    }

    /// Short machine-readable category used by the CLI error prefix.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Dimension { .. } => "dimension",
            Error::Parse { .. } => "parse",
            Error::Config(_) => "config",
            Error::Domain(_) => "domain",
            Error::UndefinedCorrelation(_) => "correlation",
            Error::Lookup(_) => "lookup",
            Error::Build(_) => "build",
            Error::Mining(_) => "mining",
            Error::Io(_) => "io",
        }
    }
}
