use std::fmt::Write as _;

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::system::{weighted, OrbitSignal};
use super::DynsimError;
use crate::rational::{int, to_f64, Rational};
use crate::sequence::SequenceStore;

fn check_horizon(orbit: &OrbitSignal, store: &SequenceStore, n: u64) -> Result<(), DynsimError> {
    let horizon = orbit.len().min(store.horizon());
    if n > horizon || store.start() != 0 {
        return Err(DynsimError::HorizonExceeded { n, horizon });
    }
    Ok(())
}

/// `A(f, x, N)`: the mean of `g[n_k]` over the `n_k < N`; `0` when there are none.
pub fn subseq_average(orbit: &OrbitSignal, store: &SequenceStore, n: u64) -> Result<Rational, DynsimError> {
    check_horizon(orbit, store, n)?;
    let c = store.prefix_count(n)?;
    if c == 0 {
        return Ok(Rational::zero());
    }
    let mut counts = vec![0u64; orbit.levels.len()];
    for &x in &store.elements()[..c as usize] {
        counts[orbit.codes[x as usize] as usize] += 1;
    }
    Ok(weighted(&orbit.levels, &counts) / int(c))
}

/// `max_{1 <= N <= N_max} |A(f, x, N)|`. `A` only changes just past each
/// `n_k`, so the running means over the first `k` terms are enough.
pub fn subseq_max(orbit: &OrbitSignal, store: &SequenceStore, n_max: u64) -> Result<Rational, DynsimError> {
    check_horizon(orbit, store, n_max)?;
    let c = store.prefix_count(n_max)? as usize;
    let mut sum = Rational::zero();
    let mut best = Rational::zero();
    for (k, &x) in store.elements()[..c].iter().enumerate() {
        sum += orbit.value(x);
        let a = sum.abs() / int(k as u64 + 1);
        if a > best {
            best = a;
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: u64,
    #[serde(with = "crate::rational::wire")]
    pub a: Rational,
    pub deviation: f64,
    /// Block containing `N`: `beta_{m-1} < N <= beta_m`.
    pub block_m: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub final_deviation: f64,
    /// Least-squares slope of `ln deviation` against `ln N`, over the
    /// nonzero deviations.
    pub trend_slope: Option<f64>,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,A,deviation,block_m\n");
        for r in &self.rows {
            writeln!(out, "{},{},{},{}", r.n, to_f64(&r.a), r.deviation, r.block_m).unwrap();
        }
        out
    }
}

fn block_of(store: &SequenceStore, n: u64) -> u32 {
    store
        .blocks()
        .iter()
        .find(|b| b.beta_prev < n && n <= b.beta)
        .map(|b| b.m)
        .unwrap_or(0)
}

/// Block ends `beta_m` plus `per_decade` log-spaced lengths, up to `horizon`.
pub fn standard_checkpoints(store: &SequenceStore, horizon: u64, per_decade: u32) -> Vec<u64> {
    let mut pts: Vec<u64> = store.blocks().iter().map(|b| b.beta).filter(|&b| b >= 1 && b <= horizon).collect();
    if per_decade > 0 && horizon >= 1 {
        let steps = ((horizon as f64).log10() * per_decade as f64).ceil() as u32;
        for i in 0..=steps {
            let v = 10f64.powf(i as f64 / per_decade as f64).round() as u64;
            pts.push(v.clamp(1, horizon));
        }
        pts.push(horizon);
    }
    pts.sort_unstable();
    pts.dedup();
    pts
}

pub fn convergence_report(orbit: &OrbitSignal, store: &SequenceStore, checkpoints: &[u64]) -> Result<ConvergenceReport, DynsimError> {
    let rows = checkpoints
        .par_iter()
        .map(|&n| {
            let a = subseq_average(orbit, store, n)?;
            let deviation = to_f64(&(a.clone() - orbit.mean_true.clone()).abs());
            Ok(ConvergenceRow {
                n,
                a,
                deviation,
                block_m: block_of(store, n),
            })
        })
        .collect::<Result<Vec<_>, DynsimError>>()?;
    let final_deviation = rows.last().map(|r| r.deviation).unwrap_or(0.0);
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.deviation > 0.0)
        .map(|r| ((r.n as f64).ln(), r.deviation.ln()))
        .collect();
    let trend_slope = if pts.len() >= 2 {
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    } else {
        None
    };
    Ok(ConvergenceReport {
        rows,
        final_deviation,
        trend_slope,
    })
}
