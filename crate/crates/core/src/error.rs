use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("size distribution has no support points")]
    EmptyDistribution,
    #[error("negative or non-finite mass {mass} at size {size}")]
    InvalidMass { size: usize, mass: f64 },
    #[error("duplicate support point {0}")]
    DuplicateSupport(usize),
    #[error("masses sum to {0}, expected 1 within 1e-9")]
    NotNormalized(f64),
    #[error("all mass sits at size 0; the giant fraction is 0")]
    DegenerateAtZero,
    #[error("no mass on sizes 1..={0}")]
    EmptyTruncation(usize),
    #[error("invalid family parameters: {0}")]
    InvalidFamily(String),

    #[error("sizes out of range: {0}")]
    OutOfRange(String),
    #[error("bound preconditions violated: {0}")]
    Precondition(String),
    #[error("ground set of size {0} is too large to enumerate (limit 20)")]
    EnumerationTooLarge(usize),

    #[error("invalid graph parameters: {0}")]
    InvalidParams(String),
    #[error("attribute set size {size} exceeds the {m} available attributes")]
    SizeExceedsAttributes { size: usize, m: usize },
    #[error("type counts sum to {got}, expected n = {n}")]
    CountMismatch { got: usize, n: usize },
    #[error("probability vector is not normalized (sum {0})")]
    Unnormalized(f64),

    #[error("kernel driving measure carries mass at size 0")]
    MassAtZero,
    #[error("beta must be positive and finite, got {0}")]
    InvalidBeta(f64),
    #[error("solution does not match the measure: {0}")]
    SupportMismatch(String),

    #[error("invalid exploration config: {0}")]
    InvalidExploration(String),

    #[error("config error: {0}")]
    Config(String),
    #[error("failed to parse {path}: {source}")]
    ConfigParse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("malformed graph dump: {0}")]
    Dump(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Whether the error stems from user-supplied configuration rather than
    /// a failure while running.
    pub fn is_config(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::SupportMismatch(_))
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
