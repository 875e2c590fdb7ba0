use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {kind}")]
    Parse { line: usize, kind: ParseErrorKind },

    #[error("vertices {0} and {1} are at rounded distance 0")]
    DuplicatePoint(usize, usize),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("edge set has {edges} vertices but instance has {instance}")]
    DimensionMismatch { edges: usize, instance: usize },

    #[error("instance too large for exact oracle: n = {n}, limit {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("cannot start worker threads: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseErrorKind {
    #[error("unsupported distance mode `{0}`")]
    UnsupportedMode(String),
    #[error("missing {0}")]
    Missing(&'static str),
    #[error("DIMENSION must be at least 4, got {0}")]
    DimensionTooSmall(usize),
    #[error("malformed line: {0}")]
    Malformed(String),
    #[error("vertex index {index} out of range 1..={n}")]
    IndexOutOfRange { index: i64, n: usize },
    #[error("duplicate edge {0} {1}")]
    DuplicateEdge(usize, usize),
    #[error("expected {expected} entries, found {found}")]
    CountMismatch { expected: usize, found: usize },
}

impl Error {
    pub(crate) fn parse(line: usize, kind: ParseErrorKind) -> Self {
        Error::Parse { line, kind }
    }

    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
