use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("choice index {index} out of range for arity {arity}")]
    Arity { index: u32, arity: u32 },
    #[error("allocation ballot cannot be encoded as a ternary vote")]
    AllocationInBinaryMode,
    #[error("record references unknown election `{0}`")]
    UnknownElection(String),
    #[error("record references unknown account `{0}`")]
    UnknownAccount(String),
    #[error("account `{0}` has no token balance")]
    MissingBalance(String),
    #[error("invalid balance {value} for `{account}`")]
    InvalidBalance { account: String, value: f64 },
    #[error("degenerate distribution: {0}")]
    Degenerate(&'static str),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("dimension mismatch: {left} vs {right}")]
    Dimension { left: usize, right: usize },
    #[error("input is empty: {0}")]
    Empty(&'static str),
    #[error("invalid partition: {0}")]
    Partition(String),
    #[error("measure sets differ between series")]
    MeasureMismatch,
    #[error("token totals differ before and after transformation: {before} vs {after}")]
    TokenMismatch { before: f64, after: f64 },
    #[error("brute force limited to {limit} candidates, got {got}")]
    TooLarge { limit: usize, got: usize },
}
