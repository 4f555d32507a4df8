use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("node id {id} out of range for graph with {n} nodes")]
    NodeOutOfRange { id: usize, n: usize },

    #[error("unknown raw node label {0}")]
    UnknownLabel(i64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("capacity exceeded: {got} candidates (limit {limit})")]
    Capacity { got: usize, limit: usize },

    #[error("target has zero maximum utility; accuracy is undefined")]
    ZeroUtility,

    #[error("no feasible rewiring constant for s = {s}")]
    Infeasible { s: f64 },

    #[error("invalid graph cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
