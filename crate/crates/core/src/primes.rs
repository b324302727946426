//! Prime helpers for choosing the per-block progressions.

/// Deterministic for every `u64`.
pub fn is_prime(n: u64) -> bool {
    primal::is_prime(n)
}

/// Smallest prime `>= n`, or `None` if it would exceed `limit`.
pub fn next_prime(n: u64, limit: u64) -> Option<u64> {
    let mut c = n.max(2);
    while c <= limit {
        if is_prime(c) {
            return Some(c);
        }
        c = c.checked_add(1)?;
    }
    None
}

/// `k` consecutive primes starting at the first prime `>= start`.
pub fn consecutive_primes(start: u64, k: usize, limit: u64) -> Option<Vec<u64>> {
    let mut out = Vec::with_capacity(k);
    let mut c = start;
    while out.len() < k {
        let p = next_prime(c, limit)?;
        out.push(p);
        c = p + 1;
    }
    Some(out)
}
