use chrono::NaiveDate;
use thiserror::Error;

use crate::train::TrainingHistory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Operand shapes violate an operation's contract.
    #[error("shape mismatch in {op}: {left} vs {right}")]
    Shape {
        op: &'static str,
        left: String,
        right: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("SVD did not converge within {cap} sweeps")]
    NoConvergence { cap: usize },

    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),

    #[error("line {line}: non-positive {column} price {value}")]
    NonPositivePrice {
        line: u64,
        column: &'static str,
        value: f64,
    },

    #[error("zero volume on {0} cannot divide a return")]
    ZeroVolume(NaiveDate),

    #[error("{0} split is empty")]
    EmptySplit(&'static str),

    #[error("series too short: window length {window} needs {needed} return rows, have {have}")]
    SeriesTooShort {
        window: usize,
        needed: usize,
        have: usize,
    },

    #[error("non-finite gradient in tensor {0}")]
    NonFiniteGradient(String),

    #[error("non-finite loss at window length {window}, epoch {epoch}")]
    NonFiniteLoss { window: usize, epoch: usize },

    #[error("training aborted in stage with window length {window}: {source}")]
    TrainingAborted {
        window: usize,
        history: Box<TrainingHistory>,
        source: Box<Error>,
    },

    #[error("checkpoint {field}: {reason}")]
    Checkpoint { field: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn shape(op: &'static str, left: impl ToString, right: impl ToString) -> Self {
        Error::Shape {
            op,
            left: left.to_string(),
            right: right.to_string(),
        }
    }

    pub(crate) fn checkpoint(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Checkpoint {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
