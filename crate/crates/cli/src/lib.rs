//! End-to-end runs of the triple-junction laboratory: configuration, ε-sweeps,
//! persisted fields and reports, and the verification suite behind the
//! `triple-junction` binary.

pub mod commands;
pub mod config;
pub mod pipeline;
pub mod report;

pub use config::{BoundaryConfig, PotentialConfig, RunConfig};

use triple_junction::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// Bad configuration, unreadable input or failed output.
    pub const USAGE: i32 = 1;
    pub const HYPOTHESIS: i32 = 2;
    pub const NOT_CONVERGED: i32 = 3;
    pub const VERIFICATION: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("not converged: {0}")]
    NotConverged(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(Error),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::HypothesisViolation { .. } | Error::DegenerateConfiguration(_) => Self::Hypothesis(e.to_string()),
            Error::ConnectionNotConverged(_) | Error::SolverNotConverged { .. } => Self::NotConverged(e.to_string()),
            Error::Io(io) => Self::Io(io),
            other => Self::Core(other),
        }
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io(_) | Self::Core(_) => exit::USAGE,
            Self::Hypothesis(_) => exit::HYPOTHESIS,
            Self::NotConverged(_) => exit::NOT_CONVERGED,
            Self::Verification(_) => exit::VERIFICATION,
        }
    }
}
