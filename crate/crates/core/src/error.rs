use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,

    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },

    #[error("duplicate document id `{0}`")]
    DuplicateId(String),

    #[error("document `{0}` has empty text")]
    EmptyText(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("documents missing timestamps: {}", .0.join(", "))]
    MissingTimestamps(Vec<String>),

    #[error("invalid timestamp `{0}`")]
    InvalidTimestamp(String),

    #[error("http request to {url} failed: {message}")]
    Http { url: String, message: String },

    #[error("authentication failed ({status}): {body}")]
    Authentication { status: u16, body: String },

    #[error("archive response missing field `{0}`")]
    SchemaMismatch(String),

    #[error("empty vocabulary")]
    EmptyVocabulary,

    #[error("kernel PCA needs at least 2 documents, got {0}")]
    TooFewDocuments(usize),

    #[error("degenerate corpus: centered Gram matrix has no positive spectrum")]
    DegenerateCorpus,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("cluster {0} is empty")]
    EmptyCluster(usize),

    #[error("unknown cluster {0}")]
    UnknownCluster(usize),

    #[error("contrast needs exactly two non-empty groups: {0}")]
    InvalidContrast(String),

    #[error("document `{doc}` is not in cluster {cluster}")]
    ClusterMismatch { doc: String, cluster: usize },

    #[error("token stream does not match the text of document `{0}`")]
    StreamMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
