use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {field}: {reason}")]
    Config { field: String, reason: String },

    #[error("unknown method id `{id}`; valid ids: {valid}")]
    UnknownMethod { id: String, valid: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {reason}")]
    Csv { path: PathBuf, reason: String },

    #[error("row {row}, column `{column}`: {reason}")]
    Cell {
        row: usize,
        column: String,
        reason: String,
    },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("dimension mismatch: model expects {expected} features, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("need at least {needed} treated and {needed} control rows, have {treated} treated and {control} control")]
    TooFewRows {
        needed: usize,
        treated: usize,
        control: usize,
    },

    #[error("modified-outcome fitting assumes equal treatment and control arm sizes, got {treated} treated and {control} control")]
    Unbalanced { treated: usize, control: usize },

    #[error("degenerate selection: {treated} treated and {control} control rows selected")]
    DegenerateSelection { treated: usize, control: usize },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("model file: {0}")]
    ModelFormat(String),
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 usage/config, 2 data, 3 runtime/numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::UnknownMethod { .. } => 1,
            Error::Io { .. }
            | Error::Csv { .. }
            | Error::Cell { .. }
            | Error::MissingColumn(_)
            | Error::InvalidData(_)
            | Error::DimensionMismatch { .. }
            | Error::TooFewRows { .. }
            | Error::Unbalanced { .. }
            | Error::ModelFormat(_) => 2,
            Error::DegenerateSelection { .. } | Error::Numeric(_) => 3,
        }
    }
}
