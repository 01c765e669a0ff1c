use thiserror::Error;

/// Syntax error in a `.gr`, `.td` or certificate file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn at(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TdError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("edge ({0},{1}) is not covered by any bag")]
    UncoveredEdge(usize, usize),
    #[error("vertex {0} does not occur in any bag")]
    MissingVertex(usize),
    #[error("bags containing vertex {0} do not induce a connected subtree")]
    Disconnected(usize),
    #[error("decomposition tree is not a tree: {0}")]
    NotATree(String),
    #[error("bag {0} refers to vertex {1} outside the graph")]
    VertexOutOfRange(usize, usize),
    #[error("nice decomposition violates {0}")]
    NotNice(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid tree decomposition: {0}")]
    Decomposition(#[from] TdError),
    #[error("k must be at least 1 (got {0})")]
    InvalidK(usize),
    #[error("oracle limit exceeded: graph has {n} vertices, limit is {limit}")]
    OracleLimit { n: usize, limit: usize },
    #[error("inconsistent embedding: {0}")]
    Embedding(String),
    #[error("malformed certificate: {0}")]
    Certificate(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
