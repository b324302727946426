//! Finitely supported functions on the integers and the prime-grid operators.

pub mod battery;
pub mod fourier;
pub mod grid;
pub mod inequalities;
pub mod operators;
pub mod scalar;
pub mod signal;

use thiserror::Error;

pub use fourier::{dft, idft, parseval_residual, Spectrum};
pub use grid::{grid_parts, GridParts};
pub use inequalities::{classic_maximal_checks, l2_b0star_check, weak11_count, ClassicChecks, InequalityRecord, L2Check};
pub use operators::{maximal_b, maximal_b0, op_b, op_b0, op_b0_j, op_b_j, GridEvaluator, SupRange};
pub use scalar::{Real, Scalar};
pub use signal::{FiniteSignal, GridContext};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZopsError {
    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: u64, got: usize },
    #[error("lambda must be positive")]
    NonpositiveLambda,
    #[error("moduli {primes:?} violate 1/2 < q/q' < 2")]
    RatioViolated { primes: Vec<u64> },
    #[error("bad grid context: {0}")]
    BadContext(String),
}
