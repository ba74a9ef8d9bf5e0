use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}, line {line}: {message}")]
    Parse {
        context: String,
        line: usize,
        message: String,
    },

    #[error("invalid database: {0}")]
    Validation(String),

    #[error("unknown api id `{0}`")]
    UnknownApi(String),

    #[error("no resource link available for `{0}`")]
    NoHomepage(String),

    #[error("malformed thread document: {0}")]
    Thread(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("model file: {0}")]
    Model(String),

    #[error("evaluation: {0}")]
    Evaluation(String),

    #[error("render: {0}")]
    Render(String),

    #[error("config: {0}")]
    Config(String),

    /// A broken internal invariant, not a problem with the input.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, line: usize, message: impl ToString) -> Self {
        Error::Parse {
            context: context.into(),
            line,
            message: message.to_string(),
        }
    }

    /// Process exit code: 1 for bad input, 2 for internal invariant violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invariant(_) => 2,
            _ => 1,
        }
    }
}
