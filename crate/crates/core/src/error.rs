use thiserror::Error;

use crate::learners::LearnResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate point: the zero vector has no direction")]
    DegeneratePoint,

    #[error("degenerate rotation: target is parallel to the start vector")]
    DegenerateRotation,

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("second-moment matrix is rank deficient (condition number {condition:.3e})")]
    RankDeficient { condition: f64 },

    #[error("matrix is singular or not square")]
    SingularMatrix,

    #[error("no homogeneous separator is consistent with the examples")]
    Infeasible,

    #[error("all examples are the zero vector")]
    DegenerateExamples,

    #[error("example set is empty")]
    EmptyExamples,

    #[error("unlabeled budget exhausted in round {round}: drew {drawn} points (cap {cap})")]
    BudgetExhausted {
        round: usize,
        drawn: u64,
        cap: u64,
        partial: Box<LearnResult>,
    },

    #[error("calibration failure: {0}")]
    Calibration(String),

    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),

    #[error("linear program failed: {0}")]
    Solver(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found })
        }
    }
}
