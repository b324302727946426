use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::rational::Rational;

/// Values a signal can take: binary64, complex binary64, or exact rationals.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + Sum
{
    type Real: Real;

    fn from_i64(v: i64) -> Self;
    fn div_u64(&self, d: u64) -> Self;
    fn abs_val(&self) -> Self::Real;
    fn to_complex(&self) -> Complex64;
    fn from_real(r: Self::Real) -> Self;
}

/// Ordered scalars, used for magnitudes and thresholds.
pub trait Real: Scalar<Real = Self> + PartialOrd {
    fn to_f64(&self) -> f64;
    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }
    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    type Real = f64;
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn div_u64(&self, d: u64) -> Self {
        self / d as f64
    }
    fn abs_val(&self) -> f64 {
        self.abs()
    }
    fn to_complex(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }
    fn from_real(r: f64) -> Self {
        r
    }
}

impl Real for f64 {
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for Complex64 {
    type Real = f64;
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn div_u64(&self, d: u64) -> Self {
        self / d as f64
    }
    fn abs_val(&self) -> f64 {
        self.norm()
    }
    fn to_complex(&self) -> Complex64 {
        *self
    }
    fn from_real(r: f64) -> Self {
        Complex64::new(r, 0.0)
    }
}

impl Scalar for Rational {
    type Real = Rational;
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(v.into())
    }
    fn div_u64(&self, d: u64) -> Self {
        self / Rational::from_integer(d.into())
    }
    fn abs_val(&self) -> Rational {
        self.abs()
    }
    fn to_complex(&self) -> Complex64 {
        Complex64::new(crate::rational::to_f64(self), 0.0)
    }
    fn from_real(r: Rational) -> Self {
        r
    }
}

impl Real for Rational {
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| crate::rational::to_f64(self))
    }
}
