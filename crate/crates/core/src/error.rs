use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("singular coefficient system: squared scales must be pairwise distinct")]
    SingularSystem,

    #[error("insufficient data in d={choice} subsample: need at least {needed}, have {have}")]
    InsufficientData {
        choice: u8,
        needed: usize,
        have: usize,
    },

    #[error("covariate {coord} has zero spread in d={choice} subsample")]
    DegenerateCovariate { choice: u8, coord: usize },

    #[error("kernel denominator vanished (|sum| = {0:e})")]
    DegenerateDenominator(f64),

    #[error("OLS design for d={0} subsample is rank deficient")]
    SingularFit(u8),

    #[error("first-stage fit failed: {0}")]
    FitFailure(String),

    #[error("empty grid")]
    EmptyGrid,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("all {reps} replications failed for cell {cell}")]
    CellFailure { cell: String, reps: usize },

    #[error("subsampling failed: {0}")]
    Subsampling(String),

    #[error("dataset line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
