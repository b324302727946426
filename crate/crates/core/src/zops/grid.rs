//! Periodization of a signal along the grid intervals and the smoothed
//! parts built from it.

use num_traits::Zero;
use super::scalar::{Real, Scalar};
use super::signal::{FiniteSignal, GridContext};

/// `phi_{t,0}(x)`: the `p`-periodic extension of `phi` restricted to block `t`.
pub fn periodized<S: Scalar>(phi: &FiniteSignal<S>, ctx: &GridContext, t: i64, x: i64) -> S {
    phi.at((t - 1) * ctx.pi() + x.rem_euclid(ctx.pi()))
}

/// Average of `phi` over block `t`.
pub fn block_mean<S: Scalar>(phi: &FiniteSignal<S>, ctx: &GridContext, t: i64) -> S {
    let base = (t - 1) * ctx.pi();
    (0..ctx.pi()).map(|r| phi.at(base + r)).sum::<S>().div_u64(ctx.p)
}

/// `bar phi_0(x)`, the average over the block containing `x`.
pub fn phi_bar0<S: Scalar>(phi: &FiniteSignal<S>, ctx: &GridContext, x: i64) -> S {
    block_mean(phi, ctx, ctx.t(x))
}

/// `phi_{t,0,j}(x)`: `phi_{t,0}` averaged along the `qtil_j` shifts by `q_j`.
pub fn smeared<S: Scalar>(phi: &FiniteSignal<S>, ctx: &GridContext, t: i64, j: usize, x: i64) -> S {
    let q = ctx.primes[j] as i64;
    let qt = ctx.qtil[j];
    (0..qt as i64).map(|k| periodized(phi, ctx, t, x + k * q)).sum::<S>().div_u64(qt)
}

/// `phi_{0,j,+}(x) = phi_{t(x),0,j}(x)`.
pub fn phi_0_j_plus<S: Scalar>(phi: &FiniteSignal<S>, ctx: &GridContext, j: usize, x: i64) -> S {
    smeared(phi, ctx, ctx.t(x), j, x)
}

/// `phi_{0,j,-}(x) = phi_{t(x),0,j}(x) - bar phi_0(x)`.
pub fn phi_0_j_minus<S: Scalar>(phi: &FiniteSignal<S>, ctx: &GridContext, j: usize, x: i64) -> S {
    phi_0_j_plus(phi, ctx, j, x) - phi_bar0(phi, ctx, x)
}

/// Last grid index meeting the support (or `t(n)` for an empty signal).
fn last_block<S: Scalar>(phi: &FiniteSignal<S>, ctx: &GridContext, n: i64) -> i64 {
    if phi.is_empty() {
        ctx.t(n)
    } else {
        ctx.t(phi.hi())
    }
}

/// `sup_{N' >= 1} (1/N') sum_{k < N'} |phi_{0,j,-}(n + kp)|`.
pub fn phi_star_0_j_minus<S: Scalar>(phi: &FiniteSignal<S>, ctx: &GridContext, j: usize, n: i64) -> S::Real {
    let steps = (last_block(phi, ctx, n) - ctx.t(n) + 1).max(1);
    let mut acc = S::Real::zero();
    let mut best = S::Real::zero();
    for k in 0..steps {
        acc += phi_0_j_minus(phi, ctx, j, n + k * ctx.pi()).abs_val();
        best = best.max_of(acc.div_u64(k as u64 + 1));
    }
    best
}

/// `sup_{N' >= 1} (1/N') sum_{k < N'} phi_{0,+}(n + kp)` for real signals.
/// A negative running sum past the support tends to `0` from below, so `0`
/// joins the supremum in that case.
pub fn phi_star_0_plus<S: Real>(phi: &FiniteSignal<S>, ctx: &GridContext, n: i64) -> S {
    let steps = (last_block(phi, ctx, n) - ctx.t(n) + 1).max(1);
    let kk = ctx.k() as u64;
    let mut acc = S::zero();
    let mut best: Option<S> = None;
    for k in 0..steps {
        let x = n + k * ctx.pi();
        let v: S = (0..ctx.k()).map(|j| phi_0_j_plus(phi, ctx, j, x)).sum::<S>().div_u64(kk);
        acc += v;
        let avg = acc.div_u64(k as u64 + 1);
        best = Some(match best {
            None => avg,
            Some(b) => b.max_of(avg),
        });
    }
    let best = best.unwrap();
    if acc.is_negative() {
        best.max_of(S::zero())
    } else {
        best
    }
}

/// Every periodized part of `phi` for block `t`, each as `p` samples indexed
/// by `x mod p`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridParts<S> {
    pub t: i64,
    pub periodic: Vec<S>,
    pub mean: S,
    pub smeared: Vec<Vec<S>>,
    pub smeared_minus: Vec<Vec<S>>,
    pub periodic_minus: Vec<S>,
}

pub fn grid_parts<S: Scalar>(phi: &FiniteSignal<S>, ctx: &GridContext, t: i64) -> GridParts<S> {
    let p = ctx.p as usize;
    let periodic: Vec<S> = (0..ctx.pi()).map(|r| periodized(phi, ctx, t, r)).collect();
    let mean = periodic.iter().cloned().sum::<S>().div_u64(ctx.p);
    let smeared: Vec<Vec<S>> = (0..ctx.k())
        .map(|j| {
            let q = ctx.primes[j] as usize;
            let qt = ctx.qtil[j] as usize;
            (0..p)
                .map(|r| (0..qt).map(|k| periodic[(r + k * q) % p].clone()).sum::<S>().div_u64(qt as u64))
                .collect()
        })
        .collect();
    let smeared_minus = smeared
        .iter()
        .map(|v| v.iter().map(|x| x.clone() - mean.clone()).collect())
        .collect();
    let periodic_minus = periodic.iter().map(|x| x.clone() - mean.clone()).collect();
    GridParts {
        t,
        periodic,
        mean,
        smeared,
        smeared_minus,
        periodic_minus,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, Rational};

    #[test]
    fn delta_parts() {
        let ctx = GridContext::new(&[2, 3]).unwrap();
        let phi: FiniteSignal<Rational> = FiniteSignal::delta(0);
        let g = grid_parts(&phi, &ctx, 1);
        assert_eq!(g.mean, rat(1, 6));
        let third = rat(1, 3);
        let zero = rat(0, 1);
        assert_eq!(g.smeared[0], vec![third.clone(), zero.clone(), third.clone(), zero.clone(), third, zero]);
        assert_eq!(periodized(&phi, &ctx, 1, 6), rat(1, 1));
        assert_eq!(periodized(&phi, &ctx, 2, 6), rat(0, 1));
        assert_eq!(smeared(&phi, &ctx, 1, 0, 4), rat(1, 3));
    }

    #[test]
    fn restriction_is_recovered() {
        let ctx = GridContext::new(&[2, 3]).unwrap();
        let phi = FiniteSignal::new(-4, (0..15).map(|i| rat(i * i - 7, 3)).collect::<Vec<_>>());
        for n in -10..20 {
            assert_eq!(periodized(&phi, &ctx, ctx.t(n), n), phi.at(n));
        }
    }
}
