use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid glob pattern `{pattern}`: {message}")]
    Glob { pattern: String, message: String },

    #[error("no files matched under {0}")]
    EmptyCorpus(PathBuf),

    #[error("symlink cycle or walk failure under {path}: {message}")]
    Walk { path: PathBuf, message: String },

    #[error("corpus has no indexable documents (all empty after preprocessing)")]
    EmptyIndex,

    #[error("embedding store: {0}")]
    Embedding(String),

    #[error("scenario {dir}: {message}")]
    Scenario { dir: PathBuf, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("evaluation: {0}")]
    Eval(String),

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("json error on {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn scenario(dir: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Scenario {
            dir: dir.into(),
            message: message.into(),
        }
    }
}
