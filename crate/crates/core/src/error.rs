use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("resource limit exceeded: {needed} cells requested, budget is {budget} (set HLAB_BUDGET_CELLS to raise)")]
    Resource { needed: u128, budget: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical error: {msg} (last iterate {last})")]
    Numerical { msg: String, last: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
