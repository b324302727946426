//! Inductive block parameters and their exact constraint checks.
//!
//! Block `m` occupies `[beta_{m-1}, beta_m)`. Its parameters are chosen at
//! inductive step `m`: first the number of progressions `K_m`, then the primes,
//! then the end `beta_{m-1}` of the *previous* block. So a ledger extended
//! through step `m` has every block below `m` finalized and block `m` waiting
//! for its end point.

mod constants;
mod constraints;
mod extend;

pub use constants::{default_constants, demo_constants, ConstantTable};
pub use constraints::{check_constraints, evaluate_start_candidate, ConstraintRecord, ConstraintReport, Relation};
pub use extend::{extend_ledger, extend_to, Profile, ResourceBounds};

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{int, wire, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LedgerError {
    #[error("block {0} is not in the ledger")]
    MissingBlock(u32),
    #[error("prefix count N_{0} has not been computed")]
    MissingCount(u32),
    #[error("block {m}: {quantity} needs at least {lower_bound}, above the resource bound {bound}")]
    InfeasibleAtScale {
        m: u32,
        quantity: String,
        lower_bound: String,
        bound: String,
    },
    #[error("block {m}: no window of {k} primes below {limit} satisfies the constraints")]
    NoPrimeWindow { m: u32, k: u32, limit: u64 },
    #[error("block {m}: constraints failed: {failed:?}")]
    ConstraintsFailed { m: u32, failed: Vec<String> },
    #[error("invalid ledger: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockParams {
    pub m: u32,
    pub beta_prev: u64,
    /// End of the block; fixed by the next inductive step.
    pub beta: Option<u64>,
    pub k: u32,
    pub primes: Vec<u64>,
    pub p: u64,
    #[serde(with = "wire")]
    pub q_sum: Rational,
    pub d: u64,
    #[serde(with = "wire")]
    pub gamma: Rational,
    /// Number of sequence elements in the block, once `beta` is known.
    pub count: Option<u64>,
}

impl BlockParams {
    /// Parameters for a block with the given moduli; `p` and `q_sum` derived.
    pub fn from_primes(m: u32, beta_prev: u64, primes: Vec<u64>, d: u64, gamma: Rational) -> Result<Self, LedgerError> {
        if primes.is_empty() || primes.contains(&0) {
            return Err(LedgerError::Invalid(format!("block {m}: empty or zero modulus")));
        }
        let p = primes
            .iter()
            .try_fold(1u64, |acc, &q| acc.checked_mul(q))
            .ok_or_else(|| LedgerError::Invalid(format!("block {m}: period overflows u64")))?;
        let q_sum = primes
            .iter()
            .map(|&q| Rational::new(1.into(), q.into()))
            .fold(Rational::zero(), |a, b| a + b);
        Ok(Self {
            m,
            beta_prev,
            beta: None,
            k: primes.len() as u32,
            primes,
            p,
            q_sum,
            d,
            gamma,
            count: None,
        })
    }

    pub fn min_prime(&self) -> u64 {
        self.primes.iter().copied().min().unwrap_or(0)
    }

    pub fn max_prime(&self) -> u64 {
        self.primes.iter().copied().max().unwrap_or(0)
    }

    pub fn is_finalized(&self) -> bool {
        self.beta.is_some() && self.count.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    pub constants: ConstantTable,
    pub blocks: Vec<BlockParams>,
    /// `nbar[i] = N_i`, the number of sequence elements below `beta_i`.
    pub nbar: Vec<u64>,
}

impl Ledger {
    /// The base block `K_1 = 1, q = 1, p_1 = 1, Q(1) = 1` with `N_0 = 0`.
    pub fn base(constants: ConstantTable) -> Self {
        let gamma = gamma_for(&constants, 1, &[0]).expect("block 1 uses the small-index tolerance");
        let block = BlockParams::from_primes(1, 0, vec![1], 1, gamma).expect("unit modulus");
        Self {
            constants,
            blocks: vec![block],
            nbar: vec![0],
        }
    }

    pub fn block(&self, m: u32) -> Result<&BlockParams, LedgerError> {
        if m == 0 {
            return Err(LedgerError::MissingBlock(0));
        }
        self.blocks.get(m as usize - 1).ok_or(LedgerError::MissingBlock(m))
    }

    /// `N_i` with `N_i = 0` for `i <= 0`.
    pub fn nbar_at(&self, i: i64) -> Result<u64, LedgerError> {
        if i <= 0 {
            return Ok(0);
        }
        self.nbar.get(i as usize).copied().ok_or(LedgerError::MissingCount(i as u32))
    }

    /// `beta_i` with `beta_{-1} = beta_0 = 0`.
    pub fn beta_at(&self, i: i64) -> Result<u64, LedgerError> {
        if i <= 0 {
            return Ok(0);
        }
        let b = self.block(i as u32)?;
        b.beta.ok_or(LedgerError::MissingCount(i as u32))
    }

    /// Number of blocks whose end point and count are fixed.
    pub fn finalized_len(&self) -> u32 {
        self.blocks.iter().take_while(|b| b.is_finalized()).count() as u32
    }

    pub fn last_m(&self) -> u32 {
        self.blocks.len() as u32
    }

    /// Structural invariants (not the inequality records).
    pub fn validate(&self) -> Result<(), LedgerError> {
        let bad = |s: String| Err(LedgerError::Invalid(s));
        self.constants.validate().map_err(LedgerError::Invalid)?;
        if self.blocks.is_empty() {
            return bad("no blocks".into());
        }
        if self.nbar.first() != Some(&0) {
            return bad("N_0 must be 0".into());
        }
        if self.blocks[0].beta_prev != 0 {
            return bad("beta_0 must be 0".into());
        }
        for (i, b) in self.blocks.iter().enumerate() {
            let m = i as u32 + 1;
            if b.m != m {
                return bad(format!("block index {} stored at position {m}", b.m));
            }
            let rebuilt = BlockParams::from_primes(m, b.beta_prev, b.primes.clone(), b.d, b.gamma.clone())?;
            if rebuilt.p != b.p || rebuilt.q_sum != b.q_sum || rebuilt.k != b.k {
                return bad(format!("block {m}: p, Q or K inconsistent with primes"));
            }
            if let Some(beta) = b.beta {
                if beta < b.beta_prev {
                    return bad(format!("block {m}: beta < beta_prev"));
                }
                if let Some(next) = self.blocks.get(i + 1) {
                    if next.beta_prev != beta {
                        return bad(format!("block {}: beta_prev does not continue block {m}", m + 1));
                    }
                }
            } else if i + 1 != self.blocks.len() {
                return bad(format!("block {m} is open but is not the last block"));
            }
            if m >= 2 {
                let prev = &self.blocks[i - 1];
                if b.p <= prev.p {
                    return bad(format!("block {m}: period not increasing"));
                }
                if b.q_sum > prev.q_sum {
                    return bad(format!("block {m}: Q increases"));
                }
                if b.d < prev.d {
                    return bad(format!("block {m}: d decreases"));
                }
                if m >= 3 && b.d == self.blocks[i - 2].d {
                    return bad(format!("block {m}: d stalls for two blocks"));
                }
            }
        }
        let fin = self.finalized_len() as usize;
        if self.nbar.len() != fin + 1 {
            return bad(format!("{} prefix counts for {fin} finalized blocks", self.nbar.len()));
        }
        for (i, b) in self.blocks.iter().take(fin).enumerate() {
            if self.nbar[i + 1] != self.nbar[i] + b.count.unwrap() {
                return bad(format!("N_{} disagrees with block count", i + 1));
            }
        }
        Ok(())
    }
}

/// Density tolerance of block `m` under `table`, given `N_0..`.
pub fn gamma_for(table: &ConstantTable, m: u32, nbar: &[u64]) -> Result<Rational, LedgerError> {
    if m <= table.gamma_small_max_m {
        return Ok(table.gamma_small.clone());
    }
    let idx = m as i64 - 2;
    let n = if idx <= 0 {
        0
    } else {
        *nbar.get(idx as usize).ok_or(LedgerError::MissingCount(idx as u32))?
    };
    if n == 0 {
        return Err(LedgerError::Invalid(format!("block {m}: tolerance needs N_{idx} > 0")));
    }
    Ok((table.gamma_large_coef.clone() * int(m + 1) * int(n)).recip())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn base_block() {
        let l = Ledger::base(default_constants());
        let b = l.block(1).unwrap();
        assert_eq!((b.k, b.p, b.primes.clone()), (1, 1, vec![1]));
        assert_eq!(b.q_sum, int(1));
        assert_eq!(b.gamma, rat(1, 8));
        assert!(l.validate().is_ok());
        assert_eq!(l.block(2), Err(LedgerError::MissingBlock(2)));
        assert_eq!(l.nbar_at(-2).unwrap(), 0);
        assert_eq!(l.nbar_at(1), Err(LedgerError::MissingCount(1)));
    }

    #[test]
    fn late_tolerance_shrinks_with_history() {
        let c = default_constants();
        let g = gamma_for(&c, 4, &[0, 100, 5000]).unwrap();
        assert_eq!(g, Rational::new(1.into(), (2000u64 * 5 * 5000).into()));
        assert!(gamma_for(&c, 5, &[0, 100]).is_err());
    }

    #[test]
    fn json_shape() {
        let l = Ledger::base(default_constants());
        let text = serde_json::to_string(&l).unwrap();
        assert!(text.starts_with(r#"{"constants":{"profile":"faithful","gamma_beta":{"num":"1","den":"1000"}"#));
        let blocks = text.find(r#""blocks":"#).unwrap();
        assert!(blocks < text.find(r#""nbar":[0]"#).unwrap());
        let back: Ledger = serde_json::from_str(&text).unwrap();
        assert_eq!(back, l);
    }
}
