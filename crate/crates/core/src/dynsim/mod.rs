//! Concrete measure-preserving systems at finite horizon and averages along
//! the constructed sequence.

pub mod averages;
pub mod counts;
pub mod decompose;
pub mod system;
pub mod tower;

use thiserror::Error;

use crate::ledger::LedgerError;
use crate::sequence::SequenceError;

pub use averages::{convergence_report, standard_checkpoints, subseq_average, subseq_max, ConvergenceReport, ConvergenceRow};
pub use counts::{count_bounds_check, CountRecord, CountReport};
pub use decompose::{decompose, Decomposition, DecompositionCheck, DecompositionStep};
pub use system::{sample_orbit, Angle, Observable, Orbit, OrbitSignal, PrecisionAudit, SystemSpec};
pub use tower::{build_tower, dynamical_b, dynamical_b_j, tower_transfer_check, Tower, TransferReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynsimError {
    #[error("bad system spec: {0}")]
    BadSpec(String),
    #[error("length {n} exceeds the horizon {horizon}")]
    HorizonExceeded { n: u64, horizon: u64 },
    #[error("tower of height {height} leaves no valid window for horizon {horizon} and p = {p}")]
    TowerTooShort { height: u64, horizon: u64, p: u64 },
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}
