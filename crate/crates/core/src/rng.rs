//! Seeded generator shared by every randomized battery.
//!
//! SplitMix64 (Steele, Lea and Flood) is small enough to reimplement in any
//! language, so a seed printed in a report replays anywhere.

use rand::SeedableRng;
pub use rand_xoshiro::SplitMix64;

pub fn seeded(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

/// Independent stream for trial `i` of a battery seeded with `seed`.
pub fn trial_rng(seed: u64, i: u64) -> SplitMix64 {
    let mut base = seeded(seed ^ i.wrapping_mul(GAMMA));
    use rand::RngCore;
    seeded(base.next_u64())
}

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Output `n` (from 0) of the stream `seeded(seed)`, without stepping through
/// the earlier ones.
pub fn splitmix_at(seed: u64, n: u64) -> u64 {
    let mut z = seed.wrapping_add(n.wrapping_add(1).wrapping_mul(GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
