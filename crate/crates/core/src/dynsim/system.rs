use num_bigint::{BigInt, BigUint};
use num_integer::Roots;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DynsimError;
use crate::rational::{int, Rational};
use crate::rng::splitmix_at;

/// Rotation angle in `(0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Angle {
    /// `(sqrt 5 - 1) / 2`.
    Golden,
    /// Fractional part of `sqrt n`, `n` not a square.
    SqrtFrac(u64),
    #[serde(with = "crate::rational::wire")]
    Rational(Rational),
}

impl Angle {
    /// `floor(alpha * 2^bits)`.
    pub fn fixed(&self, bits: u32) -> Result<BigUint, DynsimError> {
        let one = BigUint::one() << bits;
        match self {
            Angle::Golden => {
                let s = (BigUint::from(5u8) << (2 * bits)).sqrt();
                Ok((s - &one) >> 1)
            }
            Angle::SqrtFrac(n) => {
                let r = n.sqrt();
                if r * r == *n {
                    return Err(DynsimError::BadSpec(format!("{n} is a perfect square")));
                }
                Ok((BigUint::from(*n) << (2 * bits)).sqrt() - BigUint::from(r) * one)
            }
            Angle::Rational(a) => {
                if !(a.is_positive() && *a < int(1)) {
                    return Err(DynsimError::BadSpec(format!("rotation angle {a} outside (0,1)")));
                }
                Ok(((a.numer() << bits) / a.denom()).to_biguint().unwrap())
            }
        }
    }

    pub fn tag(&self) -> String {
        match self {
            Angle::Golden => "golden".into(),
            Angle::SqrtFrac(n) => format!("frac(sqrt {n})"),
            Angle::Rational(a) => a.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SystemSpec {
    /// `x -> x + alpha mod 1` in 128-bit fixed point.
    Rotation { alpha: Angle },
    /// `x -> x + 1 mod P`, observed at the phase `x / P`.
    Cyclic { period: u64 },
    /// Shift on i.i.d. uniform phases drawn from `splitmix_at(seed, .)`;
    /// `Observable::Symbol` reads the Bernoulli(`p`) coordinate.
    IidBernoulli {
        seed: u64,
        #[serde(with = "crate::rational::wire")]
        p: Rational,
    },
}

impl SystemSpec {
    pub fn tag(&self) -> String {
        match self {
            SystemSpec::Rotation { alpha } => format!("rotation({})", alpha.tag()),
            SystemSpec::Cyclic { period } => format!("cyclic({period})"),
            SystemSpec::IidBernoulli { seed, p } => format!("iid(seed={seed},p={p})"),
        }
    }
}

/// A finite-valued function on the phase space `[0, 1)` (or on `Z_P`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Observable {
    #[serde(with = "crate::rational::wire")]
    Constant(Rational),
    /// `1_[lo, hi)`.
    Indicator {
        #[serde(with = "crate::rational::wire")]
        lo: Rational,
        #[serde(with = "crate::rational::wire")]
        hi: Rational,
    },
    /// `values[i]` on `[breaks[i-1], breaks[i])`, with `breaks` interior points.
    Step {
        #[serde(with = "crate::rational::wire_vec")]
        breaks: Vec<Rational>,
        #[serde(with = "crate::rational::wire_vec")]
        values: Vec<Rational>,
    },
    /// Indicator of a residue set; cyclic systems only.
    Residues(Vec<u64>),
    /// The Bernoulli coordinate; i.i.d. systems only.
    Symbol,
}

impl Observable {
    pub fn describe(&self) -> String {
        match self {
            Observable::Constant(c) => format!("const {c}"),
            Observable::Indicator { lo, hi } => format!("1[{lo},{hi})"),
            Observable::Step { breaks, values } => {
                let b: Vec<String> = breaks.iter().map(|x| x.to_string()).collect();
                let v: Vec<String> = values.iter().map(|x| x.to_string()).collect();
                format!("step breaks={} values={}", b.join(" "), v.join(" "))
            }
            Observable::Residues(r) => format!("residues {r:?}"),
            Observable::Symbol => "symbol".into(),
        }
    }

    /// Interior breaks and their `n + 1` values, for phase observables.
    pub fn as_step(&self, spec: &SystemSpec) -> Result<(Vec<Rational>, Vec<Rational>), DynsimError> {
        let bad = |s: &str| Err(DynsimError::BadSpec(s.into()));
        let (breaks, values) = match (self, spec) {
            (Observable::Constant(c), _) => (vec![], vec![c.clone()]),
            (Observable::Indicator { lo, hi }, _) => (vec![lo.clone(), hi.clone()], vec![int(0), int(1), int(0)]),
            (Observable::Step { breaks, values }, _) => (breaks.clone(), values.clone()),
            (Observable::Symbol, SystemSpec::IidBernoulli { p, .. }) => (vec![p.clone()], vec![int(1), int(0)]),
            (Observable::Symbol, _) => return bad("the symbol observable needs an i.i.d. system"),
            (Observable::Residues(_), _) => return bad("residue observables need a cyclic system"),
        };
        if values.len() != breaks.len() + 1 {
            return bad("a step function needs one more value than breaks");
        }
        if breaks.iter().any(|b| b.is_negative() || *b > int(1)) || !breaks.windows(2).all(|w| w[0] <= w[1]) {
            return bad("breaks must be nondecreasing in [0, 1]");
        }
        if let (Observable::Indicator { lo, .. }, _) = (self, spec) {
            if *lo >= int(1) {
                return bad("indicator endpoints must lie in [0, 1)");
            }
        }
        Ok((breaks, values))
    }
}

/// `Observable` compiled against one system for fast evaluation.
#[derive(Clone, Debug)]
enum Compiled {
    /// Thresholds on the 128-bit phase; `None` is never reached.
    Fixed(Vec<Option<u128>>),
    /// Thresholds on the residue `x`.
    Cyclic(Vec<u64>),
    Residues(Vec<bool>),
}

/// A system together with an observable, evaluable at any time `n`.
#[derive(Clone, Debug)]
pub struct Orbit {
    pub spec: SystemSpec,
    pub observable: Observable,
    pub x0: u128,
    alpha: u128,
    compiled: Compiled,
    levels: Vec<Rational>,
    mean_true: Rational,
}

fn ceil_fixed(b: &Rational, bits: u32) -> BigUint {
    let scaled = Rational::from_integer(BigInt::one() << bits) * b;
    scaled.ceil().to_integer().to_biguint().unwrap()
}

impl Orbit {
    /// `x0` is the starting phase as a 128-bit fraction of `[0, 1)` for
    /// rotations, the residue for cyclic systems, and the time shift for
    /// i.i.d. systems.
    pub fn new(spec: SystemSpec, observable: Observable, x0: u128) -> Result<Self, DynsimError> {
        let mut alpha = 0u128;
        let (compiled, levels, mean_true) = match (&spec, &observable) {
            (SystemSpec::Cyclic { period }, Observable::Residues(set)) => {
                if *period == 0 {
                    return Err(DynsimError::BadSpec("cyclic period must be at least 1".into()));
                }
                let mut mark = vec![false; *period as usize];
                for &r in set {
                    mark[(r % period) as usize] = true;
                }
                let ones = mark.iter().filter(|&&b| b).count();
                (Compiled::Residues(mark), vec![int(0), int(1)], Rational::new(ones.into(), (*period).into()))
            }
            (SystemSpec::Cyclic { period }, _) => {
                if *period == 0 {
                    return Err(DynsimError::BadSpec("cyclic period must be at least 1".into()));
                }
                let (breaks, values) = observable.as_step(&spec)?;
                // First residue with x / P >= b.
                let th: Vec<u64> = breaks
                    .iter()
                    .map(|b| (b * int(*period)).ceil().to_integer().to_u64().unwrap())
                    .collect();
                let mut edges = vec![0u64];
                edges.extend(th.iter().copied());
                edges.push(*period);
                let mean = values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| v * int(edges[i + 1] - edges[i]))
                    .sum::<Rational>()
                    / int(*period);
                (Compiled::Cyclic(th), values, mean)
            }
            _ => {
                match &spec {
                    SystemSpec::Rotation { alpha: a } => alpha = a.fixed(128)?.to_u128().unwrap(),
                    SystemSpec::IidBernoulli { p, .. } if p.is_negative() || *p > int(1) => {
                        return Err(DynsimError::BadSpec(format!("Bernoulli parameter {p} outside [0,1]")));
                    }
                    _ => {}
                }
                let (breaks, values) = observable.as_step(&spec)?;
                let th = breaks.iter().map(|b| ceil_fixed(b, 128).to_u128()).collect();
                let mut edges = vec![int(0)];
                edges.extend(breaks.iter().cloned());
                edges.push(int(1));
                let mean = values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| v * (edges[i + 1].clone() - edges[i].clone()))
                    .sum();
                (Compiled::Fixed(th), values, mean)
            }
        };
        if levels.len() > u16::MAX as usize {
            return Err(DynsimError::BadSpec("too many levels".into()));
        }
        if let SystemSpec::Cyclic { period } = &spec {
            if x0 >= *period as u128 {
                return Err(DynsimError::BadSpec(format!("start {x0} is not a residue mod {period}")));
            }
        }
        Ok(Self {
            spec,
            observable,
            x0,
            alpha,
            compiled,
            levels,
            mean_true,
        })
    }

    pub fn levels(&self) -> &[Rational] {
        &self.levels
    }

    pub fn mean_true(&self) -> &Rational {
        &self.mean_true
    }

    /// Index into `levels` of `f(T^n x0)`.
    pub fn code_at(&self, n: u64) -> u16 {
        match (&self.compiled, &self.spec) {
            (Compiled::Residues(mark), SystemSpec::Cyclic { period }) => {
                u16::from(mark[((self.x0 as u64 % period + n % period) % period) as usize])
            }
            (Compiled::Cyclic(th), SystemSpec::Cyclic { period }) => {
                let x = (self.x0 as u64 % period + n % period) % period;
                th.iter().filter(|&&t| x >= t).count() as u16
            }
            (Compiled::Fixed(th), spec) => {
                let phase = match spec {
                    SystemSpec::IidBernoulli { seed, .. } => (splitmix_at(*seed, (self.x0 as u64).wrapping_add(n)) as u128) << 64,
                    _ => self.x0.wrapping_add(self.alpha.wrapping_mul(n as u128)),
                };
                th.iter().filter(|t| t.is_some_and(|t| phase >= t)).count() as u16
            }
            _ => unreachable!("compiled form matches the system"),
        }
    }

    pub fn sample(&self, n_max: u64) -> Result<OrbitSignal, DynsimError> {
        if n_max == 0 {
            return Err(DynsimError::BadSpec("orbit length must be at least 1".into()));
        }
        let codes: Vec<u16> = (0..n_max).into_par_iter().map(|n| self.code_at(n)).collect();
        Ok(OrbitSignal {
            system_tag: self.spec.tag(),
            x0: self.x0,
            f: self.observable.describe(),
            codes,
            levels: self.levels.clone(),
            mean_true: self.mean_true.clone(),
        })
    }

    /// Recompute a rotation orbit with 256-bit phases. Returns the times where
    /// the two disagree and the times within `1e-12` of a break (`None` for
    /// other systems).
    pub fn precision_audit(&self, n_max: u64) -> Option<PrecisionAudit> {
        let SystemSpec::Rotation { alpha } = &self.spec else {
            return None;
        };
        let (breaks, _) = self.observable.as_step(&self.spec).ok()?;
        let alpha256 = alpha.fixed(256).ok()?;
        let modulus = BigUint::one() << 256u32;
        let x0 = BigUint::from(self.x0) << 128u32;
        let th: Vec<BigUint> = breaks.iter().map(|b| ceil_fixed(b, 256)).collect();
        let eps = (BigUint::one() << 256u32) / BigUint::from(1_000_000_000_000u64);
        let mut audit = PrecisionAudit::default();
        let mut phase = x0;
        for n in 0..n_max {
            let code = th.iter().filter(|t| phase >= **t).count() as u16;
            let near = th.iter().any(|t| if phase >= *t { &phase - t < eps } else { t - &phase < eps });
            if near {
                audit.near_break.push(n);
            } else if code != self.code_at(n) {
                audit.disagreements.push(n);
            }
            phase = (phase + &alpha256) % &modulus;
        }
        Some(audit)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PrecisionAudit {
    pub disagreements: Vec<u64>,
    pub near_break: Vec<u64>,
}

/// `g[n] = f(T^n x0)` for `n < N_max`, stored as level indices.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitSignal {
    pub system_tag: String,
    pub x0: u128,
    pub f: String,
    pub codes: Vec<u16>,
    pub levels: Vec<Rational>,
    pub mean_true: Rational,
}

impl OrbitSignal {
    pub fn len(&self) -> u64 {
        self.codes.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn value(&self, n: u64) -> &Rational {
        &self.levels[self.codes[n as usize] as usize]
    }

    /// `(1/N) sum_{n<N} g[n]`.
    pub fn birkhoff_average(&self, n: u64) -> Result<Rational, DynsimError> {
        if n == 0 || n > self.len() {
            return Err(DynsimError::HorizonExceeded { n, horizon: self.len() });
        }
        let mut counts = vec![0u64; self.levels.len()];
        for &c in &self.codes[..n as usize] {
            counts[c as usize] += 1;
        }
        Ok(weighted(&self.levels, &counts) / int(n))
    }
}

pub(crate) fn weighted(levels: &[Rational], counts: &[u64]) -> Rational {
    levels
        .iter()
        .zip(counts)
        .filter(|(_, &c)| c > 0)
        .map(|(l, &c)| l * int(c))
        .fold(Rational::zero(), |a, b| a + b)
}

pub fn sample_orbit(spec: SystemSpec, observable: Observable, x0: u128, n_max: u64) -> Result<OrbitSignal, DynsimError> {
    Orbit::new(spec, observable, x0)?.sample(n_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn half() -> Observable {
        Observable::Indicator { lo: int(0), hi: rat(1, 2) }
    }

    #[test]
    fn half_rotation_alternates() {
        let g = sample_orbit(SystemSpec::Rotation { alpha: Angle::Rational(rat(1, 2)) }, half(), 0, 8).unwrap();
        let v: Vec<i64> = (0..8).map(|n| g.value(n).to_integer().to_i64().unwrap()).collect();
        assert_eq!(v, vec![1, 0, 1, 0, 1, 0, 1, 0]);
        assert_eq!(g.mean_true, rat(1, 2));
    }

    #[test]
    fn cyclic_residue_block() {
        let f = Observable::Indicator { lo: int(0), hi: rat(7, 35) };
        let g = sample_orbit(SystemSpec::Cyclic { period: 35 }, f, 0, 70).unwrap();
        assert_eq!(g.mean_true, rat(1, 5));
        assert_eq!((0..35).filter(|&n| g.codes[n] == 1).count(), 7);
        assert!((0..35).all(|n| g.codes[n] == g.codes[n + 35]));
        assert!((0..7).all(|n| g.codes[n] == 1));
        let r = sample_orbit(SystemSpec::Cyclic { period: 35 }, Observable::Residues((0..7).collect()), 0, 35).unwrap();
        assert!((0..35).all(|n| r.value(n) == g.value(n)));
    }

    #[test]
    fn golden_angle_digits() {
        let a = Angle::Golden.fixed(64).unwrap().to_u64().unwrap();
        // floor(0.6180339887498948482... * 2^64)
        assert_eq!(a, 0x9E37_79B9_7F4A_7C15);
        let s2 = Angle::SqrtFrac(2).fixed(64).unwrap().to_u64().unwrap();
        assert_eq!(s2, 0x6A09_E667_F3BC_C908);
        assert!(Angle::SqrtFrac(9).fixed(64).is_err());
        assert!(Angle::Rational(int(1)).fixed(64).is_err());
    }

    #[test]
    fn golden_birkhoff_third() {
        let f = Observable::Indicator { lo: int(0), hi: rat(1, 3) };
        let g = sample_orbit(SystemSpec::Rotation { alpha: Angle::Golden }, f, 0, 1_000_000).unwrap();
        let avg = g.birkhoff_average(1_000_000).unwrap();
        // Exact oracle on the true irrational: frac(n phi) < 1/3 iff
        // floor(3 n phi) == 3 floor(n phi), with floor(k n phi) from isqrt.
        let fl = |k: u128, n: u128| ((5 * k * k * n * n).sqrt() - k * n) / 2;
        let direct = (0..1_000_000u128).filter(|&n| fl(3, n) == 3 * fl(1, n)).count();
        assert_eq!(avg, Rational::new(direct.into(), 1_000_000.into()));
        let dev = (crate::rational::to_f64(&avg) - 1.0 / 3.0).abs();
        assert!(dev < 5e-6, "{dev}");
    }

    #[test]
    fn doubled_precision_agrees() {
        let o = Orbit::new(SystemSpec::Rotation { alpha: Angle::Golden }, half(), 12345 << 100).unwrap();
        let a = o.precision_audit(20_000).unwrap();
        assert!(a.disagreements.is_empty());
    }

    #[test]
    fn iid_frequency() {
        let o = Orbit::new(SystemSpec::IidBernoulli { seed: 5, p: rat(1, 4) }, Observable::Symbol, 0).unwrap();
        assert_eq!(*o.mean_true(), rat(1, 4));
        let g = o.sample(100_000).unwrap();
        let f = crate::rational::to_f64(&g.birkhoff_average(100_000).unwrap());
        assert!((f - 0.25).abs() < 0.01);
        assert!(Orbit::new(SystemSpec::Cyclic { period: 5 }, Observable::Symbol, 0).is_err());
    }
}
