use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("solver did not converge after {iters} iterations (relative residual {residual:e})")]
    NonConvergence { iters: usize, residual: f64 },
    #[error("connected components differ between the two graphs")]
    ComponentMismatch,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("retry budget exhausted: {0}")]
    RetryBudget(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("weight overflow")]
    Overflow,
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
