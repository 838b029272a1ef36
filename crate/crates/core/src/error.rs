use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A line of one of the text formats could not be parsed. Fields are
    /// numbered from 1.
    #[error("field {field}: {reason}")]
    MalformedLine { field: usize, reason: String },

    /// Wraps an error with the 1-based line number it occurred on.
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("link {src}-{tgt} outside a {src_len}x{tgt_len} segment")]
    IndexOutOfBounds {
        src: usize,
        tgt: usize,
        src_len: usize,
        tgt_len: usize,
    },

    #[error("subject filtering requested but no dependency labels were supplied")]
    MissingLabels,

    #[error("cannot train a language model on an empty corpus")]
    EmptyCorpus,

    #[error("language model has not been trained")]
    UntrainedModel,

    #[error("length mismatch: {gold} gold labels vs {pred} predictions")]
    LengthMismatch { gold: usize, pred: usize },

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("no gold examples to score")]
    EmptyGold,

    #[error("invalid model file: {0}")]
    ModelFormat(String),

    #[error("parallel inputs disagree: {0}")]
    InputMismatch(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn malformed(field: usize, reason: impl Into<String>) -> Self {
        Error::MalformedLine {
            field,
            reason: reason.into(),
        }
    }

    /// Attaches a 1-based line number; I/O errors are left as they are.
    pub fn at_line(self, line: usize) -> Self {
        match self {
            e @ Error::Io(_) => e,
            e => Error::AtLine {
                line,
                source: Box::new(e),
            },
        }
    }

    /// The 1-based input line the error refers to, if known.
    pub fn line(&self) -> Option<usize> {
        match self {
            Error::AtLine { line, .. } => Some(*line),
            _ => None,
        }
    }
}
