use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::constraints::{block_records, check_constraints, evaluate_start_candidate};
use super::{default_constants, demo_constants, gamma_for, BlockParams, ConstantTable, Ledger, LedgerError};
use crate::primes::{consecutive_primes, next_prime};
use crate::rational::{floor, int, pow, Rational};
use crate::sequence::construct::{BlockSpec, PeriodPattern};

#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Faithful,
    Demo(ConstantTable),
}

impl Profile {
    pub fn demo() -> Self {
        Profile::Demo(demo_constants())
    }

    pub fn constants(&self) -> ConstantTable {
        match self {
            Profile::Faithful => default_constants(),
            Profile::Demo(t) => t.clone(),
        }
    }
}

/// Caps on the search; exceeding one is reported as `InfeasibleAtScale`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceBounds {
    pub max_k: u64,
    pub max_prime: u64,
    pub max_beta: u64,
}

impl Default for ResourceBounds {
    fn default() -> Self {
        Self {
            max_k: 1_000_000_000_000,
            max_prime: 1_000_000_000,
            max_beta: 1_000_000_000_000,
        }
    }
}

/// Smallest admissible `K_m`: the prime-count growth bound, floored by `k_min`.
fn min_k(c: &ConstantTable, m: u32, n2: u64) -> BigInt {
    let needed = c.k_growth_coef.clone() * int(n2) * pow(&(c.k_growth_base.clone() * c.k_threshold_base.clone()), m + 1);
    let growth = floor(&needed) + BigInt::from(1);
    growth.max(BigInt::from(c.k_min))
}

/// Lower bound on `min q` from the prime-size and deletion-fraction records.
fn min_prime_bound(c: &ConstantTable, m: u32, k: u64, d: u64, n2: u64, gamma: &Rational) -> BigInt {
    let k = int(k);
    let d1 = int(d + 1);
    let spacing = int(n2) * c.spacing_coef.clone() * k.clone() * k.clone() * d1.clone() * c.spacing_rhs.clone() * int(m + 1);
    let deletion = c.deletion_coef.clone() * k * d1 / gamma.clone();
    floor(&spacing).max(floor(&deletion)).max(BigInt::from(d))
}

fn choose_primes(ledger: &Ledger, m: u32, k: u64, d: u64, gamma: &Rational, bounds: &ResourceBounds) -> Result<BlockParams, LedgerError> {
    let c = &ledger.constants;
    let n2 = ledger.nbar_at(m as i64 - 2)?;
    let no_window = || LedgerError::NoPrimeWindow {
        m,
        k: k.min(u32::MAX as u64) as u32,
        limit: bounds.max_prime,
    };
    let start = min_prime_bound(c, m, k, d, n2, gamma) + BigInt::from(1);
    let start = start.to_u64().filter(|&s| s <= bounds.max_prime).ok_or_else(no_window)?;
    let mut s = next_prime(start, bounds.max_prime).ok_or_else(no_window)?;
    loop {
        let primes = consecutive_primes(s, k as usize, bounds.max_prime).ok_or_else(no_window)?;
        if *primes.last().unwrap() < 2 * s {
            if primes.iter().try_fold(1u64, |a, &q| a.checked_mul(q)).is_none() {
                return Err(LedgerError::InfeasibleAtScale {
                    m,
                    quantity: "p_m".into(),
                    lower_bound: primes.iter().map(|&q| BigInt::from(q)).product::<BigInt>().to_string(),
                    bound: u64::MAX.to_string(),
                });
            }
            let b = BlockParams::from_primes(m, 0, primes, d, gamma.clone())?;
            if block_records(ledger, &b)?.iter().all(|r| r.satisfied) {
                return Ok(b);
            }
        }
        s = next_prime(s + 1, bounds.max_prime).ok_or_else(no_window)?;
    }
}

/// Element count of block `prev` over `[prev.beta_prev, end)`.
struct PrevCounter<'a> {
    prev: &'a BlockParams,
    pattern: Option<PeriodPattern>,
}

impl<'a> PrevCounter<'a> {
    fn new(prev: &'a BlockParams) -> Self {
        Self {
            prev,
            pattern: PeriodPattern::new(&prev.primes, prev.d),
        }
    }

    fn spec(&self, end: u64) -> BlockSpec<'_> {
        BlockSpec {
            lo: self.prev.beta_prev,
            hi: end,
            moduli: &self.prev.primes,
            min_gap: self.prev.d,
        }
    }

    fn exact(&self, end: u64) -> u64 {
        self.spec(end).count(self.pattern.as_ref())
    }

    /// Monotone upper bound on `exact`: periodic survivors below the top
    /// `d` positions plus every progression point inside them.
    fn upper(&self, end: u64) -> u64 {
        let lo = self.prev.beta_prev;
        match &self.pattern {
            Some(pat) if end > lo => {
                let body_end = end.saturating_sub(self.prev.d).max(lo);
                let top: u64 = self.prev.primes.iter().map(|&q| self.prev.d / q + 1).sum();
                pat.count_prefix(body_end - lo) + top
            }
            _ => self.exact(end),
        }
    }
}

fn choose_start(ledger: &Ledger, b: &BlockParams, bounds: &ResourceBounds) -> Result<(u64, u64), LedgerError> {
    let m = b.m;
    let prev = ledger.block(m - 1)?;
    let counter = PrevCounter::new(prev);
    let n2 = ledger.nbar_at(m as i64 - 2)?;
    let passes = |beta: u64, count: u64| -> Result<bool, LedgerError> {
        if count == 0 {
            return Ok(false);
        }
        Ok(evaluate_start_candidate(ledger, b, beta, n2 + count)?.overall)
    };
    let lo_c = prev.beta_prev / b.p + 1;
    let hi_c = bounds.max_beta / b.p;
    let infeasible = || LedgerError::InfeasibleAtScale {
        m,
        quantity: format!("beta_{}", m - 1),
        lower_bound: format!("> {}", bounds.max_beta),
        bound: bounds.max_beta.to_string(),
    };
    if hi_c < lo_c || !passes(hi_c * b.p, counter.upper(hi_c * b.p))? {
        return Err(infeasible());
    }
    // With the upper count every record is monotone in beta, so bisect for the
    // first multiple that could pass, then scan with the exact count.
    let (mut a, mut z) = (lo_c, hi_c);
    while a < z {
        let mid = a + (z - a) / 2;
        if passes(mid * b.p, counter.upper(mid * b.p))? {
            z = mid;
        } else {
            a = mid + 1;
        }
    }
    for c in a..=hi_c {
        let beta = c * b.p;
        let count = counter.exact(beta);
        if passes(beta, count)? {
            return Ok((beta, count));
        }
    }
    Err(infeasible())
}

/// Perform the next inductive step: choose `d_m`, `gamma_m`, `K_m`, the primes
/// and `beta_{m-1}`, then record `N_{m-1}`.
pub fn extend_ledger(ledger: &Ledger, bounds: &ResourceBounds) -> Result<Ledger, LedgerError> {
    ledger.validate()?;
    let m = ledger.last_m() + 1;
    let c = &ledger.constants;
    let d = m as u64;
    let gamma = gamma_for(c, m, &ledger.nbar)?;
    let n2 = ledger.nbar_at(m as i64 - 2)?;

    let k = min_k(c, m, n2);
    let k_u = match k.to_u64() {
        Some(k) if k <= bounds.max_k => k,
        _ => {
            return Err(LedgerError::InfeasibleAtScale {
                m,
                quantity: "K_m".into(),
                lower_bound: k.to_string(),
                bound: bounds.max_k.to_string(),
            })
        }
    };

    let mut block = choose_primes(ledger, m, k_u, d, &gamma, bounds)?;
    let (beta_prev, count) = choose_start(ledger, &block, bounds)?;

    let mut out = ledger.clone();
    let prev = out.blocks.last_mut().unwrap();
    prev.beta = Some(beta_prev);
    prev.count = Some(count);
    let total = out.nbar.last().unwrap() + count;
    out.nbar.push(total);
    block.beta_prev = beta_prev;
    out.blocks.push(block);

    let report = check_constraints(&out, m)?;
    if !report.overall {
        return Err(LedgerError::ConstraintsFailed { m, failed: report.failed() });
    }
    Ok(out)
}

/// Run inductive steps until block `through` is present.
pub fn extend_to(profile: &Profile, through: u32, bounds: &ResourceBounds) -> Result<Ledger, LedgerError> {
    let mut l = Ledger::base(profile.constants());
    while l.last_m() < through {
        l = extend_ledger(&l, bounds)?;
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn faithful_second_block() {
        let l = extend_to(&Profile::Faithful, 2, &ResourceBounds::default()).unwrap();
        let b2 = l.block(2).unwrap();
        assert_eq!(b2.primes, vec![97, 101]);
        assert_eq!(b2.p, 9797);
        assert_eq!(b2.q_sum, rat(198, 9797));
        assert_eq!(l.block(1).unwrap().beta, Some(9797 * 10_001));
        assert_eq!(l.nbar, vec![0, 97_979_797]);
    }

    #[test]
    fn faithful_third_block_is_out_of_reach() {
        let l = extend_to(&Profile::Faithful, 2, &ResourceBounds::default()).unwrap();
        match extend_ledger(&l, &ResourceBounds::default()) {
            Err(LedgerError::InfeasibleAtScale { m: 3, quantity, lower_bound, .. }) => {
                assert_eq!(quantity, "K_m");
                // 32 * 10^4 * 4^4 * 2^4 * N_1, plus one.
                let expected = BigInt::from(320_000u64 * 256 * 16) * BigInt::from(97_979_797u64) + BigInt::from(1);
                assert_eq!(lower_bound, expected.to_string());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn demo_blocks() {
        let l = extend_to(&Profile::demo(), 3, &ResourceBounds::default()).unwrap();
        assert_eq!(l.block(2).unwrap().primes, vec![53, 59]);
        assert_eq!(l.block(3).unwrap().primes, vec![67, 71]);
        assert_eq!(l.block(1).unwrap().beta, Some(9381));
        assert!(l.validate().is_ok());
    }
}
