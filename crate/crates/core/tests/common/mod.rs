#![allow(dead_code)]

use std::sync::OnceLock;

use ergoseq::ledger::{extend_to, Ledger, Profile, ResourceBounds};
use ergoseq::sequence::{build_store, SequenceStore};

/// Direct reading of the block rule: a multiple `n` of `q_j` in `[lo, hi)`
/// survives unless some multiple of another modulus lies in
/// `[max(lo, n - d), min(hi - 1, n + d)]`.
pub fn brute_block(lo: u64, hi: u64, moduli: &[u64], d: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for n in lo..hi {
        let mut kept = false;
        for (j, &q) in moduli.iter().enumerate() {
            if n % q != 0 {
                continue;
            }
            let a = lo.max(n.saturating_sub(d));
            let b = (hi - 1).min(n + d);
            let close = (a..=b).any(|x| moduli.iter().enumerate().any(|(jj, &qq)| jj != j && x % qq == 0));
            kept |= !close;
        }
        if kept {
            out.push(n);
        }
    }
    out
}

/// Demo ledger with blocks 1..=5 finalized.
pub fn demo_ledger() -> &'static Ledger {
    static L: OnceLock<Ledger> = OnceLock::new();
    L.get_or_init(|| extend_to(&Profile::demo(), 6, &ResourceBounds::default()).unwrap())
}

pub fn demo_store() -> &'static SequenceStore {
    static S: OnceLock<SequenceStore> = OnceLock::new();
    S.get_or_init(|| build_store(demo_ledger(), Some(5)).unwrap())
}
