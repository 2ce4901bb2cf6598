use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("untypeable column: every cell is missing")]
    UntypeableColumn,

    #[error("unsupported chart type: {0:?}")]
    UnsupportedChartType(String),

    #[error("unsupported axis: {0:?}")]
    UnsupportedAxis(String),

    #[error("line {line}: {message}")]
    Record { line: usize, message: String },

    #[error("duplicate pair id: {0}")]
    DuplicateId(String),

    #[error("invalid pair {id}: {message}")]
    InvalidPair { id: String, message: String },

    #[error("empty rulebook")]
    EmptyRulebook,

    #[error("unknown archetype {0:?}")]
    UnknownArchetype(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("column length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("feature {0:?} is not in the discretization map")]
    UnfittedFeature(String),

    #[error("missing value but the feature has no missing bin")]
    NoMissingBin,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("cannot intersect an empty list of boxes")]
    EmptyIntersection,

    #[error("negative list is empty")]
    NoNegatives,

    #[error("no recognizable features for column {0:?}")]
    NoFeatures(String),

    #[error("training diverged at epoch {epoch}: {message}")]
    Divergence { epoch: usize, message: String },

    #[error("model was trained against discretization {expected}, got {got}")]
    FingerprintMismatch { expected: String, got: String },

    #[error("schema mismatch in {path}: expected {expected}, got {got}")]
    Schema {
        path: PathBuf,
        expected: String,
        got: String,
    },

    #[error("leakage guard: {0}")]
    LeakageGuard(String),

    #[error("{0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by malformed inputs rather than numerics.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::Divergence { .. })
    }
}
