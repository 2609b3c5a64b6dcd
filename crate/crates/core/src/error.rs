use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: negative or non-finite edge weight {weight}")]
    InvalidWeight { line: usize, weight: f64 },

    #[error("invalid edge {from} -> {to} with weight {weight}")]
    InvalidEdge { from: usize, to: usize, weight: f64 },

    #[error("not a simple path of the graph: {0}")]
    InvalidPath(String),

    #[error("edge index {index} out of range for a path with {edges} edges")]
    InvalidEdgeIndex { index: usize, edges: usize },

    #[error("cannot build a planted instance with n = {n}, m = {m}")]
    InfeasibleInstance { n: usize, m: usize },

    #[error("graph has {n} vertices, over the exhaustive-search cap of {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
