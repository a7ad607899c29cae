//! Error type shared by every simulator module.

use std::path::PathBuf;

use thiserror::Error;

use crate::field::NodeId;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum SimError {
    /// A configuration value violates a model invariant.
    #[error("configuration error: {0}")]
    Config(String),

    /// A node id that is not part of the field.
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),

    /// An operation was applied to an object in the wrong state.
    #[error("state error: {0}")]
    State(String),

    /// A function argument outside its domain.
    #[error("argument error: {0}")]
    Argument(String),

    /// A MAC or tracking protocol rule was broken by the caller.
    #[error("protocol error: {0}")]
    Protocol(String),

    /// The representative could not be elected from an empty detector set.
    #[error("cannot elect a representative from an empty detector set")]
    EmptyElection,

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl SimError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        SimError::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        SimError::Csv {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 1 config, 2 runtime, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config(_) => 1,
            SimError::Io { .. } | SimError::Csv { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
