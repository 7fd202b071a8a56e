use thiserror::Error;

/// Errors raised by the fitting library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate sample: {0}")]
    DegenerateSample(&'static str),
    #[error("not enough data: need {needed} points, have {available}")]
    ExhaustedData { needed: usize, available: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("similarity undefined for two all-zero preference vectors")]
    UndefinedSimilarity,
    #[error("label count {labels} does not match point count {points}")]
    LabelMismatch { labels: usize, points: usize },
    #[error("degenerate homography: {0}")]
    DegenerateHomography(&'static str),
    #[error("coefficient matrix is rank deficient")]
    RankDeficient,
    #[error("no candidate pose has positive support")]
    NoValidPose,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
