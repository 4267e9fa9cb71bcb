use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the domain of a special function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid fractional order {0}: must lie in (0, 1]")]
    Order(f64),

    /// Two grid functions (or a function and an operator) live on different grids,
    /// or a value vector has the wrong length.
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite sample at node {node}")]
    NonFinite { node: usize },

    #[error("fixed boundary violated at node {node}: expected {expected}, found {found}")]
    Constraint {
        node: usize,
        expected: f64,
        found: f64,
    },

    #[error("Lagrangian evaluation failed{}: {what}", node.map(|i| format!(" at node {i}")).unwrap_or_default())]
    Evaluation { node: Option<usize>, what: String },

    #[error("unknown problem '{0}'")]
    Registry(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("precondition failed: {0}")]
    Precondition(String),
}
