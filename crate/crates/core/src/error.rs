use thiserror::Error;

/// Errors produced by estimator construction, evaluation and calibration.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {what} (attainable: {attainable})")]
    Range { what: String, attainable: String },

    #[error("infinite moment: {0}")]
    InfiniteMoment(String),

    #[error("sample too small: need n >= {required}, got {actual}")]
    InsufficientSample { required: usize, actual: usize },

    #[error("degenerate estimator pair: {0}")]
    DegeneratePair(String),

    #[error("percentile {percentile} outside consistency window [{lo}, {hi}] ({what})")]
    WindowViolation {
        what: String,
        percentile: f64,
        lo: f64,
        hi: f64,
    },

    #[error("{0} cannot be evaluated on a sample")]
    NotSampleEvaluable(String),

    #[error("method not applicable: {0}")]
    UnsupportedMethod(String),

    #[error("empty table: {0}")]
    EmptyTable(String),

    #[error("all estimator combinations excluded: {0}")]
    AllCombinationsExcluded(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
