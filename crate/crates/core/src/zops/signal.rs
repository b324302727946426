use num_traits::Zero;
use serde::Serialize;

use super::scalar::{Real, Scalar};
use super::ZopsError;

/// A finitely supported function on the integers, stored densely on
/// `[lo, lo + values.len())`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSignal<S> {
    pub lo: i64,
    pub values: Vec<S>,
}

impl<S: Scalar> FiniteSignal<S> {
    pub fn new(lo: i64, values: Vec<S>) -> Self {
        Self { lo, values }
    }

    pub fn delta(at: i64) -> Self {
        Self::new(at, vec![S::from_i64(1)])
    }

    pub fn zero() -> Self {
        Self::new(0, Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Last index of the stored range (inclusive).
    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    pub fn at(&self, n: i64) -> S {
        if n < self.lo {
            return S::zero();
        }
        self.values.get((n - self.lo) as usize).cloned().unwrap_or_else(S::zero)
    }

    pub fn bound(&self) -> S::Real {
        self.values
            .iter()
            .map(|v| v.abs_val())
            .fold(S::Real::zero(), |a, b| a.max_of(b))
    }

    pub fn l1(&self) -> S::Real {
        self.values.iter().map(|v| v.abs_val()).sum()
    }

    pub fn abs(&self) -> FiniteSignal<S::Real> {
        FiniteSignal::new(self.lo, self.values.iter().map(|v| v.abs_val()).collect())
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> FiniteSignal<T> {
        FiniteSignal::new(self.lo, self.values.iter().map(f).collect())
    }
}

/// The prime grid: `p = q_1 ... q_K` with grid intervals `[(t-1)p, tp)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GridContext {
    pub p: u64,
    pub primes: Vec<u64>,
    pub qtil: Vec<u64>,
}

impl GridContext {
    /// Requires pairwise distinct moduli with `1/2 < q_j / q_j' < 2`.
    pub fn new(primes: &[u64]) -> Result<Self, ZopsError> {
        let ctx = Self::new_unchecked(primes)?;
        let lo = *primes.iter().min().unwrap();
        let hi = *primes.iter().max().unwrap();
        if hi >= 2 * lo {
            return Err(ZopsError::RatioViolated { primes: primes.to_vec() });
        }
        Ok(ctx)
    }

    /// Same, without the ratio condition.
    pub fn new_unchecked(primes: &[u64]) -> Result<Self, ZopsError> {
        if primes.is_empty() || primes.contains(&0) {
            return Err(ZopsError::BadContext("need at least one positive modulus".into()));
        }
        let mut sorted = primes.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != primes.len() {
            return Err(ZopsError::BadContext("moduli must be distinct".into()));
        }
        let p = primes
            .iter()
            .try_fold(1u64, |a, &q| a.checked_mul(q))
            .ok_or_else(|| ZopsError::BadContext("period overflows".into()))?;
        if p > i64::MAX as u64 {
            return Err(ZopsError::BadContext("period overflows".into()));
        }
        Ok(Self {
            p,
            primes: primes.to_vec(),
            qtil: primes.iter().map(|&q| p / q).collect(),
        })
    }

    pub fn k(&self) -> usize {
        self.primes.len()
    }

    pub fn satisfies_ratio(&self) -> bool {
        let lo = *self.primes.iter().min().unwrap();
        let hi = *self.primes.iter().max().unwrap();
        hi < 2 * lo
    }

    pub fn pi(&self) -> i64 {
        self.p as i64
    }

    /// `sum_j qtil_j = p Q`.
    pub fn qtil_sum(&self) -> u64 {
        self.qtil.iter().sum()
    }

    pub fn max_q(&self) -> u64 {
        *self.primes.iter().max().unwrap()
    }

    /// Grid index `t(n)` with `n` in `[(t-1)p, tp)`.
    pub fn t(&self, n: i64) -> i64 {
        n.div_euclid(self.pi()) + 1
    }

    /// `(t_0, t_1, N')` for the window starting at `n` of length `N`.
    pub fn window(&self, n: i64, len: u64) -> (i64, i64, u64) {
        let t0 = self.t(n);
        let t1 = self.t(n + len as i64);
        (t0, t1, (t1 - t0 + 1) as u64)
    }

    /// `I(n, N)` as a half-open range of offsets from `n`.
    pub fn interval(&self, n: i64, len: u64) -> (i64, i64) {
        let (t0, t1, _) = self.window(n, len);
        ((t0 - 1) * self.pi() - n, t1 * self.pi() - n)
    }

    pub fn label(&self) -> String {
        let qs: Vec<String> = self.primes.iter().map(|q| q.to_string()).collect();
        format!("({})", qs.join(","))
    }
}
