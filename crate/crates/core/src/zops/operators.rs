//! The grid averaging operators and their maximal versions.
//!
//! Free functions evaluate the defining sums point by point. [`GridEvaluator`]
//! precomputes per-block residue sums and is what the batteries use.

use num_traits::Zero;
use super::grid::block_mean;
use super::scalar::{Real, Scalar};
use super::signal::{FiniteSignal, GridContext};

/// Sum of `phi(x)` over `x` in blocks `t0..=t1` with `x = n (mod q)`.
fn progression_sum<S: Scalar>(phi: &FiniteSignal<S>, ctx: &GridContext, n: i64, q: u64, t0: i64, t1: i64) -> S {
    if phi.is_empty() {
        return S::zero();
    }
    let q = q as i64;
    let from = ((t0 - 1) * ctx.pi()).max(phi.lo);
    let to = (t1 * ctx.pi()).min(phi.hi() + 1);
    if from >= to {
        return S::zero();
    }
    let mut x = from + (n - from).rem_euclid(q);
    let mut acc = S::zero();
    while x < to {
        acc += phi.at(x);
        x += q;
    }
    acc
}

/// `B(phi, n, N, j)`.
pub fn op_b_j<S: Scalar>(phi: &FiniteSignal<S>, ctx: &GridContext, n: i64, len: u64, j: usize) -> S {
    let (t0, t1, np) = ctx.window(n, len);
    progression_sum(phi, ctx, n, ctx.primes[j], t0, t1).div_u64(np * ctx.qtil[j])
}

/// `B(phi, n, N)`: the `nu_j`-weighted mean of the per-progression values.
pub fn op_b<S: Scalar>(phi: &FiniteSignal<S>, ctx: &GridContext, n: i64, len: u64) -> S {
    let (_, _, np) = ctx.window(n, len);
    let mut num = S::zero();
    let mut den = 0u64;
    for j in 0..ctx.k() {
        let nu = np * ctx.qtil[j];
        num += op_b_j(phi, ctx, n, len, j) * S::from_i64(nu as i64);
        den += nu;
    }
    num.div_u64(den)
}

fn b0_block_term<S: Scalar>(phi: &FiniteSignal<S>, ctx: &GridContext, n: i64, j: usize, t: i64) -> S::Real {
    let mean = block_mean(phi, ctx, t);
    let q = ctx.primes[j] as i64;
    let base = (t - 1) * ctx.pi();
    let mut x = base + (n - base).rem_euclid(q);
    let mut acc = S::zero();
    while x < t * ctx.pi() {
        acc += phi.at(x) - mean.clone();
        x += q;
    }
    acc.abs_val()
}

/// `B_0(phi, n, N, j)`.
pub fn op_b0_j<S: Scalar>(phi: &FiniteSignal<S>, ctx: &GridContext, n: i64, len: u64, j: usize) -> S::Real {
    let (t0, t1, np) = ctx.window(n, len);
    if phi.is_empty() {
        return S::Real::zero();
    }
    let lo = t0.max(ctx.t(phi.lo));
    let hi = t1.min(ctx.t(phi.hi()));
    let mut acc = S::Real::zero();
    for t in lo..=hi {
        acc += b0_block_term(phi, ctx, n, j, t);
    }
    acc.div_u64(np * ctx.qtil[j])
}

/// `B_0(phi, n, N)`.
pub fn op_b0<S: Scalar>(phi: &FiniteSignal<S>, ctx: &GridContext, n: i64, len: u64) -> S::Real {
    let (_, _, np) = ctx.window(n, len);
    let mut num = S::Real::zero();
    let mut den = 0u64;
    for j in 0..ctx.k() {
        let nu = np * ctx.qtil[j];
        num += op_b0_j(phi, ctx, n, len, j) * S::Real::from_i64(nu as i64);
        den += nu;
    }
    num.div_u64(den)
}

/// Which window lengths a supremum ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SupRange {
    /// Every `N' >= 1`, i.e. every `N >= 0`.
    AllBlocks,
    /// `N >= 1` literally. For `n = -1 (mod p)` this skips `N' = 1`.
    LengthAtLeastOne,
}

impl SupRange {
    fn first_len(self) -> u64 {
        match self {
            SupRange::AllBlocks => 0,
            SupRange::LengthAtLeastOne => 1,
        }
    }
}

/// Window lengths `N` to sweep so that every distinct `N'` past the support
/// is visited once.
fn length_sweep<S: Scalar>(phi: &FiniteSignal<S>, ctx: &GridContext, n: i64, range: SupRange) -> Vec<u64> {
    let last_t = if phi.is_empty() { ctx.t(n) } else { ctx.t(phi.hi()) };
    let t0 = ctx.t(n);
    let first = range.first_len();
    let mut lens = vec![first];
    let (_, _, np_first) = ctx.window(n, first);
    let max_np = (last_t - t0 + 1).max(np_first as i64) as u64;
    // N' = k is reached first at N = (t0 + k - 2) p + ... ; step to each new block start.
    for np in np_first + 1..=max_np {
        let len = ((t0 - 1 + np as i64 - 1) * ctx.pi() - n) as u64;
        lens.push(len.max(first));
    }
    lens
}

/// `B_0^*(phi, n, j)` by sweeping window lengths with the point-by-point sums.
pub fn maximal_b0_j_by_length<S: Scalar>(phi: &FiniteSignal<S>, ctx: &GridContext, n: i64, j: usize, range: SupRange) -> S::Real {
    length_sweep(phi, ctx, n, range)
        .into_iter()
        .map(|len| op_b0_j(phi, ctx, n, len, j))
        .fold(S::Real::zero(), |a, b| a.max_of(b))
}

/// `B_K^*(phi, n) = sup_N (1/K) sum_j B(phi, n, N, j)` by sweeping lengths.
pub fn maximal_bk_by_length<S: Real>(phi: &FiniteSignal<S>, ctx: &GridContext, n: i64, range: SupRange) -> S {
    let k = ctx.k() as u64;
    let mut best: Option<S> = None;
    let mut last_num = S::zero();
    for len in length_sweep(phi, ctx, n, range) {
        let parts: Vec<S> = (0..ctx.k()).map(|j| op_b_j(phi, ctx, n, len, j)).collect();
        let (_, _, np) = ctx.window(n, len);
        last_num = parts.iter().cloned().sum::<S>() * S::from_i64(np as i64);
        let v = parts.into_iter().sum::<S>().div_u64(k);
        best = Some(match best {
            None => v,
            Some(b) => b.max_of(v),
        });
    }
    let best = best.unwrap();
    if last_num.is_negative() {
        best.max_of(S::zero())
    } else {
        best
    }
}

/// Per-block residue sums of a signal, for fast operator evaluation.
#[derive(Clone, Debug)]
pub struct GridEvaluator<S: Scalar> {
    pub ctx: GridContext,
    t_lo: i64,
    t_hi: i64,
    /// `sums[b][j][r]`: sum of `phi` over block `t_lo + b` at `x = r (mod q_j)`.
    sums: Vec<Vec<Vec<S>>>,
    /// `centered[b][j][r] = |sums[b][j][r] - block_sum / q_j|`.
    centered: Vec<Vec<Vec<S::Real>>>,
}

/// Running numerators along `N' = 1, 2, ...` at the points where they change.
struct Profile<V> {
    steps: Vec<(u64, V)>,
}

impl<S: Scalar> GridEvaluator<S> {
    pub fn new(phi: &FiniteSignal<S>, ctx: &GridContext) -> Self {
        let (t_lo, t_hi) = if phi.is_empty() { (1, 0) } else { (ctx.t(phi.lo), ctx.t(phi.hi())) };
        let mut sums = Vec::new();
        let mut centered = Vec::new();
        for t in t_lo..=t_hi {
            let base = (t - 1) * ctx.pi();
            let mut per_j: Vec<Vec<S>> = ctx.primes.iter().map(|&q| vec![S::zero(); q as usize]).collect();
            let mut total = S::zero();
            for x in 0..ctx.pi() {
                let v = phi.at(base + x);
                if v.is_zero() {
                    continue;
                }
                for (j, &q) in ctx.primes.iter().enumerate() {
                    per_j[j][(x as u64 % q) as usize] += v.clone();
                }
                total += v;
            }
            let cen = per_j
                .iter()
                .enumerate()
                .map(|(j, row)| {
                    let share = total.div_u64(ctx.primes[j]);
                    row.iter().map(|s| (s.clone() - share.clone()).abs_val()).collect()
                })
                .collect();
            sums.push(per_j);
            centered.push(cen);
        }
        Self {
            ctx: ctx.clone(),
            t_lo,
            t_hi,
            sums,
            centered,
        }
    }

    fn residues(&self, n: i64) -> Vec<usize> {
        self.ctx.primes.iter().map(|&q| n.rem_euclid(q as i64) as usize).collect()
    }

    /// Running numerator over `N' >= n_min` for a per-block contribution.
    fn profile<V: Clone + num_traits::Zero + std::ops::AddAssign>(
        &self,
        n: i64,
        n_min: u64,
        per_block: impl Fn(usize) -> V,
    ) -> Profile<V> {
        let t0 = self.ctx.t(n);
        let mut acc = V::zero();
        let upto = t0 + n_min as i64 - 1;
        for t in t0.max(self.t_lo)..=upto.min(self.t_hi) {
            acc += per_block((t - self.t_lo) as usize);
        }
        let mut steps = vec![(n_min, acc.clone())];
        let first_new = (self.t_lo - t0 + 1).max(n_min as i64 + 1);
        let last = self.t_hi - t0 + 1;
        for np in first_new..=last {
            let t = t0 + np - 1;
            acc += per_block((t - self.t_lo) as usize);
            steps.push((np as u64, acc.clone()));
        }
        Profile { steps }
    }

    fn n_min(&self, n: i64, range: SupRange) -> u64 {
        self.ctx.window(n, range.first_len()).2
    }

    pub fn b_j(&self, n: i64, len: u64, j: usize) -> S {
        let (_, _, np) = self.ctx.window(n, len);
        let r = n.rem_euclid(self.ctx.primes[j] as i64) as usize;
        let prof = self.profile(n, np, |b| self.sums[b][j][r].clone());
        prof.steps[0].1.div_u64(np * self.ctx.qtil[j])
    }

    pub fn b(&self, n: i64, len: u64) -> S {
        let (_, _, np) = self.ctx.window(n, len);
        let rs = self.residues(n);
        let prof = self.profile(n, np, |b| (0..self.ctx.k()).map(|j| self.sums[b][j][rs[j]].clone()).sum::<S>());
        prof.steps[0].1.div_u64(np * self.ctx.qtil_sum())
    }

    pub fn b0_j(&self, n: i64, len: u64, j: usize) -> S::Real {
        let (_, _, np) = self.ctx.window(n, len);
        let r = n.rem_euclid(self.ctx.primes[j] as i64) as usize;
        let prof = self.profile(n, np, |b| self.centered[b][j][r].clone());
        prof.steps[0].1.div_u64(np * self.ctx.qtil[j])
    }

    pub fn b0(&self, n: i64, len: u64) -> S::Real {
        let (_, _, np) = self.ctx.window(n, len);
        let rs = self.residues(n);
        let prof = self.profile(n, np, |b| {
            (0..self.ctx.k()).map(|j| self.centered[b][j][rs[j]].clone()).sum::<S::Real>()
        });
        prof.steps[0].1.div_u64(np * self.ctx.qtil_sum())
    }

    /// `B^*(phi, n, j) = sup_N |B(phi, n, N, j)|`.
    pub fn maximal_b_j(&self, n: i64, j: usize, range: SupRange) -> S::Real {
        let r = n.rem_euclid(self.ctx.primes[j] as i64) as usize;
        let qt = self.ctx.qtil[j];
        self.profile(n, self.n_min(n, range), |b| self.sums[b][j][r].clone())
            .steps
            .into_iter()
            .map(|(np, a)| a.abs_val().div_u64(np * qt))
            .fold(S::Real::zero(), |a, b| a.max_of(b))
    }

    /// `B^*(phi, n) = sup_N |B(phi, n, N)|`.
    pub fn maximal_b(&self, n: i64, range: SupRange) -> S::Real {
        let rs = self.residues(n);
        let d = self.ctx.qtil_sum();
        self.profile(n, self.n_min(n, range), |b| {
            (0..self.ctx.k()).map(|j| self.sums[b][j][rs[j]].clone()).sum::<S>()
        })
        .steps
        .into_iter()
        .map(|(np, a)| a.abs_val().div_u64(np * d))
        .fold(S::Real::zero(), |a, b| a.max_of(b))
    }

    pub fn maximal_b0_j(&self, n: i64, j: usize, range: SupRange) -> S::Real {
        let r = n.rem_euclid(self.ctx.primes[j] as i64) as usize;
        let qt = self.ctx.qtil[j];
        self.profile(n, self.n_min(n, range), |b| self.centered[b][j][r].clone())
            .steps
            .into_iter()
            .map(|(np, a)| a.div_u64(np * qt))
            .fold(S::Real::zero(), |a, b| a.max_of(b))
    }

    pub fn maximal_b0(&self, n: i64, range: SupRange) -> S::Real {
        let rs = self.residues(n);
        let d = self.ctx.qtil_sum();
        self.profile(n, self.n_min(n, range), |b| {
            (0..self.ctx.k()).map(|j| self.centered[b][j][rs[j]].clone()).sum::<S::Real>()
        })
        .steps
        .into_iter()
        .map(|(np, a)| a.div_u64(np * d))
        .fold(S::Real::zero(), |a, b| a.max_of(b))
    }

    /// For `n` in block `t_lo - s` (`s >= 1`), the combined `B_0` numerator
    /// divided by `sum_j qtil_j` after `k = 1..` support blocks; the value at
    /// `N' = s + k` is `a_k / (s + k)`. Indexed by `n mod p`.
    pub(crate) fn b0_left_tails(&self) -> Vec<Vec<(i64, S::Real)>> {
        let d = self.ctx.qtil_sum();
        let blocks = self.sums.len();
        (0..self.ctx.pi())
            .map(|r| {
                let rs = self.residues(r);
                let mut acc = S::Real::zero();
                (0..blocks)
                    .map(|b| {
                        acc += (0..self.ctx.k()).map(|j| self.centered[b][j][rs[j]].clone()).sum::<S::Real>();
                        (b as i64 + 1, acc.div_u64(d))
                    })
                    .collect()
            })
            .collect()
    }

    /// Grid-index range `[t_lo, t_hi]` meeting the support (empty if `t_lo > t_hi`).
    pub fn support_blocks(&self) -> (i64, i64) {
        (self.t_lo, self.t_hi)
    }
}

impl<S: Real> GridEvaluator<S> {
    /// `B_K^*(phi, n) = sup_N (1/K) sum_j B(phi, n, N, j)` (no absolute value).
    pub fn maximal_bk(&self, n: i64, range: SupRange) -> S {
        let rs = self.residues(n);
        let k = self.ctx.k();
        let qts = self.ctx.qtil.clone();
        let prof = self.profile(n, self.n_min(n, range), |b| {
            // Scale each progression by 1/qtil_j so the sum is a plain mean of B_j.
            (0..k).map(|j| self.sums[b][j][rs[j]].div_u64(qts[j])).sum::<S>()
        });
        let last = prof.steps.last().unwrap().1.clone();
        let best = prof
            .steps
            .into_iter()
            .map(|(np, a)| a.div_u64(np * k as u64))
            .reduce(|a, b| a.max_of(b))
            .unwrap();
        if last.is_negative() {
            best.max_of(S::zero())
        } else {
            best
        }
    }
}

pub fn maximal_b<S: Scalar>(phi: &FiniteSignal<S>, ctx: &GridContext, n: i64) -> S::Real {
    GridEvaluator::new(phi, ctx).maximal_b(n, SupRange::AllBlocks)
}

pub fn maximal_b0<S: Scalar>(phi: &FiniteSignal<S>, ctx: &GridContext, n: i64) -> S::Real {
    GridEvaluator::new(phi, ctx).maximal_b0(n, SupRange::AllBlocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, Rational};

    fn ctx23() -> GridContext {
        GridContext::new(&[2, 3]).unwrap()
    }

    #[test]
    fn delta_values() {
        let ctx = ctx23();
        let phi: FiniteSignal<Rational> = FiniteSignal::delta(0);
        assert_eq!(op_b_j(&phi, &ctx, 0, 5, 0), rat(1, 3));
        assert_eq!(op_b_j(&phi, &ctx, 0, 5, 1), rat(1, 2));
        assert_eq!(op_b(&phi, &ctx, 0, 5), rat(2, 5));
        assert_eq!(op_b0_j(&phi, &ctx, 0, 5, 0), rat(1, 6));
        assert_eq!(op_b0_j(&phi, &ctx, 0, 5, 1), rat(1, 3));
        assert_eq!(op_b0(&phi, &ctx, 0, 5), rat(7, 30));
        let ev = GridEvaluator::new(&phi, &ctx);
        assert_eq!(ev.b(0, 5), rat(2, 5));
        assert_eq!(ev.b0(0, 5), rat(7, 30));
        assert_eq!(ev.b_j(0, 5, 1), rat(1, 2));
    }

    #[test]
    fn constant_block() {
        let ctx = ctx23();
        let phi = FiniteSignal::new(0, vec![rat(1, 1); 6]);
        assert_eq!(op_b(&phi, &ctx, 0, 5), rat(1, 1));
        assert_eq!(op_b0(&phi, &ctx, 0, 5), rat(0, 1));
        for n in 0..6 {
            assert_eq!(maximal_b(&phi, &ctx, n), rat(1, 1));
            assert_eq!(maximal_b0(&phi, &ctx, n), rat(0, 1));
        }
    }

    #[test]
    fn literal_range_skips_first_block_at_last_residue() {
        let ctx = ctx23();
        let phi: FiniteSignal<Rational> = FiniteSignal::delta(5);
        let ev = GridEvaluator::new(&phi, &ctx);
        assert_eq!(ev.maximal_b0_j(5, 0, SupRange::AllBlocks), rat(1, 6));
        assert_eq!(ev.maximal_b0_j(5, 0, SupRange::LengthAtLeastOne), rat(1, 12));
        assert_eq!(maximal_b0_j_by_length(&phi, &ctx, 5, 0, SupRange::LengthAtLeastOne), rat(1, 12));
        assert_eq!(maximal_b0_j_by_length(&phi, &ctx, 5, 0, SupRange::AllBlocks), rat(1, 6));
    }

    #[test]
    fn evaluator_matches_definition() {
        let ctx = GridContext::new(&[3, 5]).unwrap();
        let phi = FiniteSignal::new(-7, (0..40).map(|i| rat((i * 37 % 11) - 5, 1 + i % 3)).collect::<Vec<_>>());
        let ev = GridEvaluator::new(&phi, &ctx);
        for n in -40..50 {
            for len in [0u64, 1, 7, 14, 15, 16, 44, 90] {
                assert_eq!(ev.b(n, len), op_b(&phi, &ctx, n, len), "n={n} N={len}");
                assert_eq!(ev.b0(n, len), op_b0(&phi, &ctx, n, len), "n={n} N={len}");
                for j in 0..2 {
                    assert_eq!(ev.b_j(n, len, j), op_b_j(&phi, &ctx, n, len, j));
                    assert_eq!(ev.b0_j(n, len, j), op_b0_j(&phi, &ctx, n, len, j));
                }
            }
            for range in [SupRange::AllBlocks, SupRange::LengthAtLeastOne] {
                for j in 0..2 {
                    assert_eq!(ev.maximal_b0_j(n, j, range), maximal_b0_j_by_length(&phi, &ctx, n, j, range));
                }
                assert_eq!(ev.maximal_bk(n, range), maximal_bk_by_length(&phi, &ctx, n, range), "n={n}");
            }
        }
    }
}
