//! Seeded randomized batteries. Every trial draws from its own stream
//! `trial_rng(seed, i)`, so a single line replays on its own.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::fourier::{dft, idft, max_abs_diff, parseval_residual};
use super::grid::{grid_parts, phi_0_j_minus, phi_star_0_j_minus, phi_star_0_plus};
use super::inequalities::{classic_maximal_checks, l2_b0star_check, weak11_count};
use super::operators::{GridEvaluator, SupRange};
use super::signal::{FiniteSignal, GridContext};
use crate::rational::{int, Rational};
use crate::rng::{trial_rng, SplitMix64};

/// One JSON line of battery output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatteryLine {
    pub test: String,
    pub ctx: String,
    pub seed: u64,
    pub trial: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub pass: bool,
}

/// An integer-valued signal that broke a bound, after shrinking.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Counterexample {
    pub test: String,
    pub ctx: String,
    pub seed: u64,
    pub trial: u64,
    pub lo: i64,
    #[serde(with = "crate::rational::wire_vec")]
    pub values: Vec<Rational>,
    pub lambda_twentieths: Option<u64>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BatteryReport {
    pub lines: Vec<BatteryLine>,
    pub counterexamples: Vec<Counterexample>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestSummary {
    pub test: String,
    pub ctx: String,
    pub trials: u64,
    pub violations: u64,
    pub max_ratio: f64,
}

impl BatteryReport {
    pub fn violations(&self) -> usize {
        self.lines.iter().filter(|l| !l.pass).count()
    }

    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            out.push_str(&serde_json::to_string(l).unwrap());
            out.push('\n');
        }
        out
    }

    /// Per `(test, ctx)` totals, in first-seen order.
    pub fn summary(&self) -> Vec<TestSummary> {
        let mut out: Vec<TestSummary> = Vec::new();
        for l in &self.lines {
            let idx = match out.iter().position(|s| s.test == l.test && s.ctx == l.ctx) {
                Some(i) => i,
                None => {
                    out.push(TestSummary {
                        test: l.test.clone(),
                        ctx: l.ctx.clone(),
                        trials: 0,
                        violations: 0,
                        max_ratio: 0.0,
                    });
                    out.len() - 1
                }
            };
            let s = &mut out[idx];
            s.trials += 1;
            s.violations += u64::from(!l.pass);
            if l.ratio.is_finite() {
                s.max_ratio = s.max_ratio.max(l.ratio);
            }
        }
        out
    }

    fn extend(&mut self, other: BatteryReport) {
        self.lines.extend(other.lines);
        self.counterexamples.extend(other.counterexamples);
    }
}

fn line(test: &str, ctx: &str, seed: u64, trial: u64, lhs: f64, rhs: f64, pass: bool) -> BatteryLine {
    let ratio = if rhs == 0.0 {
        if lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        lhs / rhs
    };
    BatteryLine {
        test: test.into(),
        ctx: ctx.into(),
        seed,
        trial,
        lhs,
        rhs,
        ratio,
        pass,
    }
}

/// Integer samples on a random stretch near the origin, some entries zeroed.
#[derive(Clone, Debug, PartialEq)]
pub struct IntSignal {
    pub lo: i64,
    pub values: Vec<i64>,
}

impl IntSignal {
    pub fn random(rng: &mut SplitMix64, p: u64, nonneg: bool) -> Self {
        let p = p as i64;
        let len = rng.gen_range(1..=3 * p) as usize;
        let lo = rng.gen_range(-2 * p..=2 * p);
        let m = rng.gen_range(1..=10i64);
        let sparse = rng.gen_bool(0.5);
        let values = (0..len)
            .map(|_| {
                if sparse && rng.gen_bool(0.6) {
                    0
                } else if nonneg {
                    rng.gen_range(0..=m)
                } else {
                    rng.gen_range(-m..=m)
                }
            })
            .collect();
        Self { lo, values }
    }

    pub fn to_f64(&self) -> FiniteSignal<f64> {
        FiniteSignal::new(self.lo, self.values.iter().map(|&v| v as f64).collect())
    }

    pub fn to_rational(&self) -> FiniteSignal<Rational> {
        FiniteSignal::new(self.lo, self.values.iter().map(|&v| int(v)).collect())
    }

    /// Greedy shrink keeping `fails` true: trim ends, zero entries, halve them.
    pub fn shrink(mut self, fails: impl Fn(&IntSignal) -> bool) -> Self {
        loop {
            let mut changed = false;
            let mut candidates: Vec<IntSignal> = Vec::new();
            if self.values.len() > 1 {
                candidates.push(IntSignal {
                    lo: self.lo + 1,
                    values: self.values[1..].to_vec(),
                });
                candidates.push(IntSignal {
                    lo: self.lo,
                    values: self.values[..self.values.len() - 1].to_vec(),
                });
            }
            for i in 0..self.values.len() {
                if self.values[i] != 0 {
                    let mut v = self.values.clone();
                    v[i] /= 2;
                    candidates.push(IntSignal { lo: self.lo, values: v });
                }
            }
            for c in candidates {
                if fails(&c) {
                    self = c;
                    changed = true;
                    break;
                }
            }
            if !changed {
                return self;
            }
        }
    }
}

fn counterexample(test: &str, ctx: &GridContext, seed: u64, trial: u64, sig: &IntSignal, lambda: Option<u64>, lhs: f64, rhs: f64) -> Counterexample {
    Counterexample {
        test: test.into(),
        ctx: ctx.label(),
        seed,
        trial,
        lo: sig.lo,
        values: sig.values.iter().map(|&v| int(v)).collect(),
        lambda_twentieths: lambda,
        lhs,
        rhs,
    }
}

/// Roundtrip, Parseval, orthogonality and projection mask over random
/// complex periods, for each context.
pub fn fourier_battery(ctxs: &[GridContext], trials: u64, seed: u64) -> BatteryReport {
    let mut report = BatteryReport::default();
    for ctx in ctxs {
        let label = ctx.label();
        let lines: Vec<Vec<BatteryLine>> = (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = trial_rng(seed, i);
                let p = ctx.p;
                let block: Vec<Complex64> = (0..p)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                let spec = dft(&block, p).unwrap();
                let back = idft(&spec);
                let rt = max_abs_diff(&back, &block);
                let pr = parseval_residual(&block, &spec);

                let phi = FiniteSignal::new(0, block.clone());
                let parts = grid_parts(&phi, ctx, 1);
                let smeared: Vec<_> = parts.smeared.iter().map(|s| dft(s, p).unwrap()).collect();
                let mut orth = 0.0f64;
                for b in 1..p as usize {
                    for j in 0..ctx.k() {
                        for jj in j + 1..ctx.k() {
                            orth = orth.max((smeared[j].coeffs[b] * smeared[jj].coeffs[b]).norm());
                        }
                    }
                }
                let mut mask = 0.0f64;
                for (j, sj) in smeared.iter().enumerate() {
                    for b in 0..p as usize {
                        let expect = if b as u64 % ctx.qtil[j] == 0 {
                            spec.coeffs[b]
                        } else {
                            Complex64::new(0.0, 0.0)
                        };
                        mask = mask.max((sj.coeffs[b] - expect).norm());
                    }
                }
                vec![
                    line("dft_roundtrip", &label, seed, i, rt, 1e-9, rt < 1e-9),
                    line("parseval", &label, seed, i, pr, 1e-9, pr < 1e-9),
                    line("character_orthogonality", &label, seed, i, orth, 1e-12, orth < 1e-12),
                    line("projection_mask", &label, seed, i, mask, 1e-9, mask < 1e-9),
                ]
            })
            .collect();
        report.lines.extend(lines.into_iter().flatten());
    }
    report
}

/// Pointwise check, in exact rationals, that the maximal grid operators equal
/// their sup-average representations over `[lo - 2p, hi + 2p]`.
pub fn representation_battery(ctxs: &[GridContext], trials: u64, seed: u64) -> BatteryReport {
    let mut report = BatteryReport::default();
    for ctx in ctxs {
        let label = ctx.label();
        let per: Vec<BatteryReport> = (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = trial_rng(seed, i);
                let sig = IntSignal::random(&mut rng, ctx.p, false);
                let mismatches = |s: &IntSignal| representation_mismatches(&s.to_rational(), ctx);
                let (mm_fluct, mm_mean, checked) = mismatches(&sig);
                let mut r = BatteryReport::default();
                r.lines.push(line("fluctuation_representation", &label, seed, i, mm_fluct as f64, 0.0, mm_fluct == 0));
                r.lines.push(line("mean_representation", &label, seed, i, mm_mean as f64, 0.0, mm_mean == 0));
                if mm_fluct + mm_mean > 0 {
                    let small = sig.clone().shrink(|s| {
                        let (a, b, _) = mismatches(s);
                        a + b > 0
                    });
                    let (a, b, _) = mismatches(&small);
                    r.counterexamples.push(counterexample("representation", ctx, seed, i, &small, None, (a + b) as f64, 0.0));
                }
                let _ = checked;
                r
            })
            .collect();
        for r in per {
            report.extend(r);
        }
    }
    report
}

/// `(fluctuation mismatches, mean mismatches, points checked)`.
pub fn representation_mismatches(phi: &FiniteSignal<Rational>, ctx: &GridContext) -> (u64, u64, u64) {
    let ev = GridEvaluator::new(phi, ctx);
    let (mut a, mut b, mut n_checked) = (0u64, 0u64, 0u64);
    let p = ctx.pi();
    for n in phi.lo - 2 * p..=phi.hi() + 2 * p {
        for j in 0..ctx.k() {
            if ev.maximal_b0_j(n, j, SupRange::AllBlocks) != phi_star_0_j_minus(phi, ctx, j, n) {
                a += 1;
            }
            // Window form of the same identity at one fixed length.
            let len = (n.rem_euclid(3) as u64) * ctx.p + 1;
            let (_, _, np) = ctx.window(n, len);
            let avg: Rational = (0..np as i64)
                .map(|k| num_traits::Signed::abs(&phi_0_j_minus(phi, ctx, j, n + k * p)))
                .sum::<Rational>()
                / int(np);
            if ev.b0_j(n, len, j) != avg {
                a += 1;
            }
        }
        if ev.maximal_bk(n, SupRange::AllBlocks) != phi_star_0_plus(phi, ctx, n) {
            b += 1;
        }
        n_checked += 1;
    }
    (a, b, n_checked)
}

/// Options for [`inequality_battery`].
#[derive(Clone, Debug)]
pub struct InequalityOptions {
    pub trials: u64,
    pub seed: u64,
}

/// The four maximal inequalities plus the pointwise weighted-mean bounds,
/// on integer signals with `lambda = M k / 20`.
pub fn inequality_battery(ctxs: &[GridContext], opts: &InequalityOptions) -> BatteryReport {
    let mut report = BatteryReport::default();
    for ctx in ctxs {
        let label = ctx.label();
        let per: Vec<BatteryReport> = (0..opts.trials)
            .into_par_iter()
            .map(|i| inequality_trial(ctx, &label, opts.seed, i))
            .collect();
        for r in per {
            report.extend(r);
        }
    }
    report
}

fn inequality_trial(ctx: &GridContext, label: &str, seed: u64, i: u64) -> BatteryReport {
    let mut rng = trial_rng(seed, i);
    let sig = IntSignal::random(&mut rng, ctx.p, false);
    let k20 = rng.gen_range(1..=20u64);
    let mut r = BatteryReport::default();
    let lambda_of = |s: &IntSignal| {
        let m = s.values.iter().map(|v| v.abs()).max().unwrap_or(0).max(1);
        (m * k20 as i64) as f64 / 20.0
    };

    let classic = |s: &IntSignal| classic_maximal_checks(&s.to_f64(), &lambda_of(s)).unwrap();
    let c = classic(&sig);
    for rec in [&c.weak, &c.strong] {
        r.lines.push(line(&rec.test, label, seed, i, rec.lhs, rec.rhs, rec.pass));
    }
    if !c.weak.pass || !c.strong.pass {
        let small = sig.clone().shrink(|s| {
            let c = classic(s);
            !c.weak.pass || !c.strong.pass
        });
        let c = classic(&small);
        let rec = if c.weak.pass { &c.strong } else { &c.weak };
        r.counterexamples.push(counterexample(&rec.test, ctx, seed, i, &small, Some(k20), rec.lhs, rec.rhs));
    }

    let weak = |s: &IntSignal| weak11_count(&s.to_f64(), ctx, &lambda_of(s)).unwrap().1;
    let w = weak(&sig);
    r.lines.push(line(&w.test, label, seed, i, w.lhs, w.rhs, w.pass));
    if !w.pass {
        let small = sig.clone().shrink(|s| !weak(s).pass);
        let w = weak(&small);
        r.counterexamples.push(counterexample(&w.test, ctx, seed, i, &small, Some(k20), w.lhs, w.rhs));
    }

    let l2 = |s: &IntSignal| l2_b0star_check(&s.to_f64(), ctx);
    let c4 = l2(&sig);
    r.lines.push(line("l2_fluctuation_maximal", label, seed, i, c4.lhs, c4.rhs, c4.squared_ok));
    r.lines.push(line("l2_fluctuation_maximal_norm_form", label, seed, i, c4.lhs.sqrt(), c4.rhs, c4.norm_ok));
    if !c4.squared_ok {
        let small = sig.clone().shrink(|s| !l2(s).squared_ok);
        let c4 = l2(&small);
        r.counterexamples.push(counterexample("l2_fluctuation_maximal", ctx, seed, i, &small, None, c4.lhs, c4.rhs));
    }

    // Weighted-mean bounds on a nonnegative signal and the fluctuation form.
    let pos = IntSignal::random(&mut rng, ctx.p, true);
    let (wm, wf) = weighted_mean_worst(&pos.to_f64(), ctx);
    r.lines.push(line("weighted_mean_bound", label, seed, i, wm.0, wm.1, within(wm.0, wm.1)));
    r.lines.push(line("weighted_fluctuation_bound", label, seed, i, wf.0, wf.1, within(wf.0, wf.1)));
    r
}

/// Worst `(lhs, rhs)` pairs, by ratio, of `B <= (2/K) sum_j B_j` and
/// `B_0 <= (2/K) sum_j B_0,j` over a grid of `(n, N)`.
pub fn weighted_mean_worst(phi: &FiniteSignal<f64>, ctx: &GridContext) -> ((f64, f64), (f64, f64)) {
    let ev = GridEvaluator::new(phi, ctx);
    let kq = 2.0 / ctx.k() as f64;
    let ratio = |(l, r): (f64, f64)| if r > 0.0 { l / r } else if l > 0.0 { f64::INFINITY } else { 0.0 };
    let mut worst = ((0.0, 0.0), (0.0, 0.0));
    let p = ctx.pi();
    for n in phi.lo - p..=phi.hi() + p {
        for len in [0u64, 1, ctx.p / 2, ctx.p, 2 * ctx.p + 3] {
            let e1 = (ev.b(n, len), kq * (0..ctx.k()).map(|j| ev.b_j(n, len, j)).sum::<f64>());
            let e2 = (ev.b0(n, len), kq * (0..ctx.k()).map(|j| ev.b0_j(n, len, j)).sum::<f64>());
            if ratio(e1) > ratio(worst.0) {
                worst.0 = e1;
            }
            if ratio(e2) > ratio(worst.1) {
                worst.1 = e2;
            }
        }
    }
    worst
}

fn within(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs * (1.0 + 1e-12) + 1e-12
}

/// The three standard contexts satisfying the ratio condition.
pub fn standard_contexts() -> Vec<GridContext> {
    [[2u64, 3], [3, 5], [5, 7]]
        .iter()
        .map(|q| GridContext::new(q).unwrap())
        .collect()
}
