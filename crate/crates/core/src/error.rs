use std::path::PathBuf;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// An input file violated its grammar or a declared invariant.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("cycle in {what}: {}", cycle.join(" -> "))]
    Cycle { what: &'static str, cycle: Vec<String> },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("vector dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("cosine similarity is undefined for a zero vector")]
    ZeroVector,

    #[error("no embedding for `{0}`")]
    NotEmbeddable(String),

    #[error("classifier needs at least 2 relation classes, found {0}")]
    TooFewClasses(usize),

    #[error("relation map is not idempotent: {from} -> {to}, but {to} -> {next}")]
    NonIdempotentMap {
        from: String,
        to: String,
        next: String,
    },

    #[error("gold standard is empty")]
    EmptyGold,

    #[error("gold standard lists ({0}) with conflicting verdicts")]
    ConflictingGold(String),

    #[error("gold universe check failed: {0}")]
    GoldUniverse(String),

    #[error("namespace must not be empty")]
    EmptyNamespace,

    #[error("malformed N-Triples line {line}: {message}")]
    NTriples { line: usize, message: String },

    #[error("invalid classifier checkpoint: {0}")]
    Checkpoint(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
