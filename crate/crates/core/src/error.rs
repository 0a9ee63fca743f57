use std::io;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("duplicate visit id: {0}")]
    DuplicateVisit(String),

    #[error("visits of patient {patient} are not ordered: {detail}")]
    UnorderedVisits { patient: String, detail: String },

    #[error("invalid visit record {visit_id}: {detail}")]
    InvalidVisit { visit_id: String, detail: String },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("only one class present in {0}; need both positives and negatives")]
    SingleClass(&'static str),

    #[error("sequence length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("cosine similarity undefined for a zero vector")]
    ZeroVector,

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("{artifact}: {detail}")]
    Format { artifact: String, detail: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn format(artifact: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Format { artifact: artifact.into(), detail: detail.into() }
    }
}
