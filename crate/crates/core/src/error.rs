use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid network: {0}")]
    Validation(String),

    #[error("graph is disconnected: {components} components")]
    Disconnected { components: usize },

    #[error("line {line} ({from}-{to}) has zero impedance")]
    ZeroImpedance { line: usize, from: usize, to: usize },

    #[error("singular admittance system at bus {bus} phase {phase}")]
    Singular { bus: usize, phase: usize },

    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    Shape {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("insufficient samples: requested {requested} {class} samples, {available} available")]
    InsufficientSamples {
        class: &'static str,
        requested: usize,
        available: usize,
    },

    #[error("corrupt file {path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },

    #[error("unknown architecture `{0}`")]
    UnknownArchitecture(String),

    #[error("source model event accuracy {accuracy:.4} is below the transfer trigger {trigger:.4}")]
    TriggerUnmet { accuracy: f64, trigger: f64 },

    #[error("{0}")]
    Task(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn shape(op: &'static str, left: &[usize], right: &[usize]) -> Self {
        Error::Shape {
            op,
            left: left.to_vec(),
            right: right.to_vec(),
        }
    }

    pub(crate) fn corrupt(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Corrupt {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
