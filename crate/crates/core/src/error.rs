use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("label column `{0}` not found")]
    MissingLabelColumn(String),
    #[error("dataset has a single class; at least two are required")]
    SingleClass,
    #[error("row {row}, column `{column}`: cannot parse `{value}`")]
    Unparseable {
        row: usize,
        column: String,
        value: String,
    },
    #[error("all labels are identical; median split is degenerate")]
    DegenerateMedian,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("linear system is singular; increase the ridge penalty")]
    Singular,
    #[error("model mismatch: {0}")]
    ModelMismatch(String),
    #[error("malformed record: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
