use std::path::PathBuf;

use thiserror::Error;

use crate::tokenize::TokenScheme;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },

    #[error("block {block}: {message}")]
    MalformedBlock { block: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot sample {requested} authors from a population of {available}")]
    SampleTooLarge { requested: usize, available: usize },

    #[error("author {author:?} has {count} tweets, needs more than {needed}")]
    TooFewTweets {
        author: String,
        count: usize,
        needed: usize,
    },

    #[error("found {found} eligible authors, need at least {needed}")]
    TooFewAuthors { found: usize, needed: usize },

    #[error("model needs at least one author")]
    EmptyModel,

    #[error("duplicate author id {0:?}")]
    DuplicateAuthor(String),

    #[error("unknown author {0:?}")]
    UnknownAuthor(String),

    #[error("token id {token} outside vocabulary of size {vocab_size}")]
    UnknownToken { token: usize, vocab_size: usize },

    #[error("scheme mismatch: expected {expected}, got {actual}")]
    SchemeMismatch {
        expected: TokenScheme,
        actual: TokenScheme,
    },

    #[error("models are built over different author sets")]
    AuthorSetMismatch,

    #[error("author id {0:?} is used by both a base author and a dual-account owner")]
    IdCollision(String),

    #[error("beta must lie in [0, 1], got {0}")]
    InvalidBeta(f64),

    #[error("model file: {0}")]
    ModelFormat(String),

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

    /// `true` for errors caused by the caller's configuration rather than by
    /// the data being processed. The CLI maps these to exit code 1.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::SampleTooLarge { .. }
                | Error::SchemeMismatch { .. }
                | Error::InvalidBeta(_)
        )
    }
}
