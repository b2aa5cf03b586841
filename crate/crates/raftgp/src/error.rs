//! Crate-wide error type and exit-code mapping for the CLI.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("node id {id} out of bounds for graph with {num_nodes} nodes")]
    NodeOutOfBounds { id: usize, num_nodes: usize },

    #[error("size mismatch: {left} vs {right} ({context})")]
    SizeMismatch {
        left: usize,
        right: usize,
        context: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// KMeans could not produce two nonempty clusters. Callers of the
    /// hierarchical recursion treat this as a stop signal, not a failure.
    #[error("degenerate split: all points coincide")]
    DegenerateSplit,

    #[error("infeasible benchmark spec: {0}")]
    InfeasibleSpec(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 usage, 3 data, 4 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) => 2,
            Error::Internal(_) => 4,
            _ => 3,
        }
    }
}
