use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("binomial C({0}, {1}) does not fit in 64 bits")]
    Overflow(u64, u64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("n = {n} exceeds the limit of {limit} for {what}")]
    TooLarge { n: usize, limit: usize, what: &'static str },

    #[error("malformed DIMACS input at line {line}: {msg}")]
    Dimacs { line: usize, msg: String },

    #[error("statevector norm drifted: |<psi|psi> - 1| = {0:e}")]
    NormDrift(f64),

    #[error("did not converge: {0}")]
    NoConvergence(String),

    #[error("budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("instance is unsatisfiable; the solver requires a satisfiable input")]
    Unsatisfiable,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
