use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("closure failed: vertex {unreachable} is unreachable from vertex {from}")]
    Closure { from: usize, unreachable: usize },

    #[error("invalid edge ({from}, {to})")]
    InvalidEdge { from: usize, to: usize },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("instance has {n} vertices, enumeration is capped at {cap}")]
    SizeCap { n: usize, cap: usize },

    #[error("instance is not complete; apply complete_graph_closure first")]
    Incomplete,

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
