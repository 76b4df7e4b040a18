use std::path::PathBuf;

use thiserror::Error;

/// Broad failure class, used by the command line to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Training,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: expected {expected} cells, found {found}")]
    RaggedRow { line: u64, expected: usize, found: usize },
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("label column `{0}` not found")]
    MissingLabelColumn(String),
    #[error("non-numeric feature cells: {}", format_violations(.0))]
    NonNumericCells(Vec<(usize, String)>),
    #[error("dataset is empty after removing incomplete rows")]
    EmptyDataset,
    #[error("unseen label value `{0}`")]
    UnseenLabel(String),
    #[error("expected a binary label, found {0} categories")]
    NotBinary(usize),
    #[error("column mismatch: missing {missing:?}, unexpected {extra:?}")]
    ColumnMismatch { missing: Vec<String>, extra: Vec<String> },
    #[error("dimension mismatch: expected {expected} columns, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("only one class present in the labels")]
    SingleClass,
    #[error("cannot build {k} folds: class {class} has only {count} samples")]
    FoldConstruction { k: usize, class: u8, count: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("target majority count {target} is not attainable (majority has {available} samples)")]
    UnattainableTarget { target: usize, available: usize },
    #[error("{model} diverged: non-finite loss at epoch {epoch}")]
    Diverged { model: &'static str, epoch: usize },
    #[error("ensemble weights are all zero")]
    ZeroWeights,
    #[error("roc points are not sorted by false positive rate")]
    UnsortedCurve,
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("model file checksum mismatch (expected {expected}, computed {computed})")]
    ChecksumMismatch { expected: String, computed: String },
    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u32),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            Config(_) => ErrorKind::Usage,
            Io { .. }
            | Csv(_)
            | RaggedRow { .. }
            | DuplicateColumn(_)
            | MissingLabelColumn(_)
            | NonNumericCells(_)
            | EmptyDataset
            | UnseenLabel(_)
            | NotBinary(_)
            | ColumnMismatch { .. }
            | ChecksumMismatch { .. }
            | UnsupportedVersion(_)
            | Json(_) => ErrorKind::Data,
            Fold { source, .. } => source.kind(),
            _ => ErrorKind::Training,
        }
    }
}

fn format_violations(cells: &[(usize, String)]) -> String {
    cells
        .iter()
        .map(|(row, col)| format!("(row {row}, column {col})"))
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T> = std::result::Result<T, Error>;
