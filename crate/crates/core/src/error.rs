use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("self-loop on node {0} is not allowed")]
    SelfLoop(usize),

    #[error("{0} is not a valid sign (expected -1, 0 or 1)")]
    InvalidSign(i64),

    #[error("triad contains a missing link")]
    OpenTriad,

    #[error("sign change {from} -> {to} is not a flip of an existing link")]
    NotAFlip { from: i8, to: i8 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("transition probability `{expr}` = {value} lies outside [0, 1]")]
    ProbabilityOutOfRange { expr: String, value: f64 },

    #[error("invalid initial conditions: {0}")]
    InvalidInitialConditions(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("{0}: no edge records found")]
    EmptyDataset(PathBuf),

    #[error("no connected component with at least {requested} nodes (largest has {largest})")]
    ComponentTooSmall { requested: usize, largest: usize },

    #[error("stationary solve failed: {0}")]
    Solver(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Whether the error stems from input data rather than configuration.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. } | Error::EmptyDataset(_) | Error::ComponentTooSmall { .. } | Error::Io { .. }
        )
    }
}
