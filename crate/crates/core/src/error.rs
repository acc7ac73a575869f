use thiserror::Error;

use crate::connections::HeteroclinicProfile;
use crate::disk_solver::{ConvergenceLog, DiskField};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Geometric input that cannot define the object (coincident minima,
    /// overlapping boundary arcs, transition layers that do not fit).
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A strict triangle inequality between surface tensions fails.
    #[error("surface tensions violate σ{}{} < σ{}{} + σ{}{}: {detail}",
        pair.0, pair.1, others[0].0, others[0].1, others[1].0, others[1].1)]
    HypothesisViolation {
        pair: (usize, usize),
        others: [(usize, usize); 2],
        detail: String,
    },

    /// Young's law has no admissible solution (some angle would be 0 or π).
    #[error("degenerate junction: {0}")]
    DegenerateConfiguration(String),

    /// Arguments of a lower-bound functional fall outside its admissible box.
    #[error("argument outside admissible box: {0}")]
    OutOfBox(String),

    #[error("heteroclinic descent for pair ({}, {}) did not converge", .0.pair.0 + 1, .0.pair.1 + 1)]
    ConnectionNotConverged(Box<HeteroclinicProfile>),

    #[error("disk minimization did not converge after {} iterations", .log.entries.len())]
    SolverNotConverged {
        best: Box<DiskField>,
        log: ConvergenceLog,
    },

    #[error("Case-2 slice configuration: {0}")]
    CaseTwo(String),

    #[error("malformed field dump: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
