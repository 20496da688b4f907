use std::path::PathBuf;

use crate::segment::Granularity;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}: text is not valid UTF-8")]
    Undecodable(String),

    #[error("{0}: zero snapshots")]
    ZeroSnapshots(String),

    #[error("{path}:{line}: malformed record: {reason}")]
    BadRecord {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("{0}: source holds {1} authors, expected exactly one")]
    MultipleAuthors(String, usize),

    #[error("unsupported source: {0}")]
    UnsupportedSource(String),

    #[error("archive {path}: {reason}")]
    Archive { path: String, reason: String },

    #[error("granularity mismatch: {0} vs {1}")]
    LevelMismatch(Granularity, Granularity),

    #[error("no edits at {0} level")]
    NoEdits(Granularity),

    #[error("no edits to analyse")]
    NoEditEvents,

    #[error("first and last versions are identical (d0f = 0)")]
    ZeroEndpointDistance,

    #[error("zero variance")]
    ZeroVariance,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("at least {required} {what} required, got {got}")]
    TooFew {
        what: &'static str,
        required: usize,
        got: usize,
    },

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("perplexity {perplexity} infeasible for {n} points (max {max})")]
    InfeasiblePerplexity { perplexity: f64, n: usize, max: f64 },

    #[error("distance matrix contains non-finite entries")]
    NonFiniteDistance,

    #[error("no positive eigenvalues: all points coincide")]
    NoPositiveEigenvalues,

    #[error("every angle is degenerate")]
    AllDegenerate,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
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
