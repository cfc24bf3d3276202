//! Error type shared across the crate.

/// Errors raised by graph construction, model validation and the numeric
/// routines built on top of them.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("node {node} out of range 1..={n}")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("self-loop at node {0}")]
    SelfLoop(usize),

    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(usize, usize),

    #[error("graph contains a directed cycle")]
    CycleDetected,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate truncation interval: {0}")]
    DegenerateInterval(String),

    #[error("intervention level {level} of node {node} has numerically zero probability")]
    DegenerateLevel { node: usize, level: usize },

    #[error("linear algebra failure: {0}")]
    LinAlg(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("invalid query: {0}")]
    Query(String),

    #[error("estimation failure: {0}")]
    Estimation(String),

    #[error("polychoric correlation is not identifiable: {0}")]
    NonIdentifiable(String),

    #[error("invalid data: {0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;
