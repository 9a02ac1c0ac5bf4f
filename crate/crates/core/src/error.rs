use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the toolkit can report. Row numbers are 1-based data rows
/// (the header is not counted).
#[derive(Debug, Error)]
pub enum Error {
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("row {row}: unknown category `{value}` for feature `{feature}`")]
    UnknownCategory {
        row: usize,
        feature: String,
        value: String,
    },
    #[error("row {row}: non-numeric cell `{value}` for feature `{feature}`")]
    NonNumericCell {
        row: usize,
        feature: String,
        value: String,
    },
    #[error("row {row}: label must be 0 or 1")]
    BadLabel { row: usize },
    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("too few rows: {rows} rows cannot be split {parts} ways")]
    TooFewRows { rows: usize, parts: usize },
    #[error("width mismatch: expected {expected} columns, found {found}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("node has no samples")]
    EmptyNode,
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("training labels contain a single class")]
    SingleClassTraining,
    #[error("evaluation labels contain a single class")]
    SingleClassEval,
    #[error("empty input")]
    EmptyInput,
    #[error("table does not match the schema the pipeline was fitted on")]
    SchemaMismatch,
    #[error("unsupported model format version {found} (this build reads {supported})")]
    VersionMismatch { found: u32, supported: u32 },
    #[error("corrupt model file: {0}")]
    CorruptModel(String),
    #[error("sweep cell {cell} failed: {source}")]
    SweepCell {
        cell: String,
        #[source]
        source: Box<Error>,
    },
    #[error("{path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::IoFailure {
            path: path.into(),
            source,
        }
    }
}
