use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::DynsimError;
use crate::rational::{int, Rational};
use crate::rng::trial_rng;
use crate::zops::{op_b, op_b_j, FiniteSignal, GridContext};

/// Columns `E, T E, ..., T^{kappa-1} E` over `Z_P` with `T x = x + 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tower {
    pub period: u64,
    pub height: u64,
    /// `E = {0, kappa, 2 kappa, ...}`, one entry per full column.
    pub base: Vec<u64>,
    #[serde(with = "crate::rational::wire")]
    pub covered: Rational,
}

pub fn build_tower(period: u64, height: u64, eps: &Rational) -> Result<Tower, DynsimError> {
    if height == 0 || height > period {
        return Err(DynsimError::BadSpec(format!("tower height {height} must lie in [1, {period}]")));
    }
    if !(*eps > int(0) && *eps < int(1)) {
        return Err(DynsimError::BadSpec("epsilon must lie in (0, 1)".into()));
    }
    let columns = period / height;
    let covered = Rational::new((columns * height).into(), period.into());
    if covered <= int(1) - eps.clone() {
        return Err(DynsimError::BadSpec(format!("height {height} covers only {covered} of Z_{period}")));
    }
    Ok(Tower {
        period,
        height,
        base: (0..columns).map(|c| c * height).collect(),
        covered,
    })
}

impl Tower {
    /// Every level `T^k E` is a set of distinct residues and no residue is
    /// on two levels.
    pub fn levels_disjoint(&self) -> bool {
        let mut seen = vec![false; self.period as usize];
        for k in 0..self.height {
            for &e in &self.base {
                let x = ((e + k) % self.period) as usize;
                if seen[x] {
                    return false;
                }
                seen[x] = true;
            }
        }
        true
    }
}

/// `B(g, x, m, N, j)` along the orbit of `x` on `Z_P`, with `r = n(x) mod p`.
pub fn dynamical_b_j(g: &[Rational], x: u64, r: u64, ctx: &GridContext, len: u64, j: usize) -> Rational {
    let p = ctx.p;
    let q = ctx.primes[j];
    let period = g.len() as u64;
    let end = (len + r) / p * p + p - r;
    let nu_j = ((len + r) / p * p + p) / q;
    // l q in [-r, end)
    let first = -((r / q) as i64);
    let mut acc = Rational::from_integer(0.into());
    let mut l = first;
    while l * (q as i64) < end as i64 {
        let y = (x as i64 + l * q as i64).rem_euclid(period as i64) as usize;
        acc += &g[y];
        l += 1;
    }
    acc / int(nu_j)
}

pub fn dynamical_b(g: &[Rational], x: u64, r: u64, ctx: &GridContext, len: u64) -> Rational {
    let p = ctx.p;
    let nu = (len + r) / p * p + p;
    let mut num = Rational::from_integer(0.into());
    let mut den = 0u64;
    for j in 0..ctx.k() {
        let nu_j = nu / ctx.primes[j];
        num += dynamical_b_j(g, x, r, ctx, len, j) * int(nu_j);
        den += nu_j;
    }
    num / int(den)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransferReport {
    pub trials: u64,
    pub horizon: u64,
    pub window: (u64, u64),
    /// Trials where every `N <= horizon` and every `j` agreed.
    pub agreements: u64,
    pub mismatches: Vec<TransferMismatch>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransferMismatch {
    pub trial: u64,
    pub column: u64,
    pub n: u64,
    pub len: u64,
}

/// Draw a column and a height `n(x)` in `[p, kappa - horizon - 2p)`, set
/// `phi_E'(n) = g(e + n)` on the column and compare the dynamical operators
/// at `x = e + n(x)` with the grid operators at `n(x)` for `N = 1..horizon`.
pub fn tower_transfer_check(tower: &Tower, g: &[Rational], ctx: &GridContext, trials: u64, horizon: u64, seed: u64) -> Result<TransferReport, DynsimError> {
    if g.len() as u64 != tower.period {
        return Err(DynsimError::BadSpec("observable length must equal the tower period".into()));
    }
    let p = ctx.p;
    let lo = p;
    let hi = tower.height.saturating_sub(horizon + 2 * p);
    if lo >= hi || tower.base.is_empty() {
        return Err(DynsimError::TowerTooShort {
            height: tower.height,
            horizon,
            p,
        });
    }
    let results: Vec<Option<TransferMismatch>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let column = tower.base[rng.gen_range(0..tower.base.len())];
            let n = rng.gen_range(lo..hi);
            let phi = FiniteSignal::new(0, (0..tower.height).map(|k| g[((column + k) % tower.period) as usize].clone()).collect());
            let x = (column + n) % tower.period;
            let r = n % p;
            for len in 1..=horizon {
                let same_j = (0..ctx.k()).all(|j| dynamical_b_j(g, x, r, ctx, len, j) == op_b_j(&phi, ctx, n as i64, len, j));
                if !same_j || dynamical_b(g, x, r, ctx, len) != op_b(&phi, ctx, n as i64, len) {
                    return Some(TransferMismatch { trial: i, column, n, len });
                }
            }
            None
        })
        .collect();
    let mismatches: Vec<_> = results.into_iter().flatten().collect();
    Ok(TransferReport {
        trials,
        horizon,
        window: (lo, hi),
        agreements: trials - mismatches.len() as u64,
        mismatches,
    })
}
