use std::path::PathBuf;

use crate::corpus_io::ImageId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("image id {id} out of range for corpus of {n} images")]
    IdOutOfRange { id: u64, n: usize },

    #[error("rank list of image {owner} contains {id} more than once")]
    DuplicateId { owner: ImageId, id: ImageId },

    #[error("rank list of image {owner} contains its owner")]
    OwnerInList { owner: ImageId },

    #[error("rank list of image {owner} has {len} entries, expected {expected}")]
    ShortList {
        owner: ImageId,
        len: usize,
        expected: usize,
    },

    #[error("query {query} has an empty relevant set")]
    EmptyRelevant { query: ImageId },

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("truncated pixmap: expected {expected} payload bytes, found {found}")]
    TruncatedImage { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("cannot fuse graphs: {0}")]
    FusionMismatch(String),

    #[error("query {0} is not a node of the graph")]
    QueryNotInGraph(ImageId),

    #[error("rank tables disagree on corpus size: {0} vs {1}")]
    CorpusSizeMismatch(usize, usize),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn param(message: impl Into<String>) -> Self {
        Error::InvalidParam(message.into())
    }
}
