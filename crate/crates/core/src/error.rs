use thiserror::Error;

/// Returned by a kNN source once its query budget is spent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("query budget exhausted")]
pub struct BudgetExhausted;

#[derive(Debug, Error)]
pub enum Error {
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error(transparent)]
    BudgetExhausted(#[from] BudgetExhausted),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("labelings differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("{0} is out of range")]
    OutOfRange(String),
    #[error("point ({x}, {y}) lies outside the mapped region")]
    OutsideRegion { x: f64, y: f64 },
    #[error("leaf {0} is already at the minimum cell size")]
    AtResolutionFloor(usize),
    #[error("mini-cluster has no observed members")]
    EmptyCluster,
    #[error("answer was not issued at the center of leaf {0}")]
    AnswerMismatch(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
