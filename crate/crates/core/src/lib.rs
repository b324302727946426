//! A sparse universally good sequence built block by block from prime
//! progressions, the prime-grid averaging operators used to control it, and
//! subsequence ergodic averages along it on concrete systems.
//!
//! - [`ledger`]: the inductive parameters and every inequality on them.
//! - [`sequence`]: the blocks themselves, counting and density checks.
//! - [`zops`]: finite signals on the integers, transforms, operators and
//!   maximal inequalities.
//! - [`dynsim`]: rotations, cyclic and i.i.d. systems, averages, towers.

pub mod dynsim;
pub mod ledger;
pub mod primes;
pub mod rational;
pub mod rng;
pub mod sequence;
pub mod zops;
