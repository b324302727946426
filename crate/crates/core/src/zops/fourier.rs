//! Transforms on one period `{0, ..., p-1}` with the `1/p` on the forward side.

use num_complex::Complex64;
use std::f64::consts::TAU;

use super::ZopsError;

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub p: u64,
    /// `coeffs[b]` is the transform at `b/p`.
    pub coeffs: Vec<Complex64>,
}

/// `e(-nb/p)` computed from `nb mod p` to keep the angle small.
fn character(n: u64, b: u64, p: u64, sign: f64) -> Complex64 {
    let r = ((n as u128 * b as u128) % p as u128) as f64;
    Complex64::from_polar(1.0, sign * TAU * r / p as f64)
}

pub fn dft(block: &[Complex64], p: u64) -> Result<Spectrum, ZopsError> {
    if block.len() as u64 != p || p == 0 {
        return Err(ZopsError::LengthMismatch { expected: p, got: block.len() });
    }
    let coeffs = (0..p)
        .map(|b| {
            let s: Complex64 = block
                .iter()
                .enumerate()
                .map(|(n, &x)| x * character(n as u64, b, p, -1.0))
                .sum();
            s / p as f64
        })
        .collect();
    Ok(Spectrum { p, coeffs })
}

pub fn idft(spec: &Spectrum) -> Vec<Complex64> {
    let p = spec.p;
    (0..p)
        .map(|n| {
            spec.coeffs
                .iter()
                .enumerate()
                .map(|(b, &c)| c * character(n, b as u64, p, 1.0))
                .sum()
        })
        .collect()
}

/// Relative gap between `(1/p) sum |x|^2` and `sum |x^|^2`.
pub fn parseval_residual(block: &[Complex64], spec: &Spectrum) -> f64 {
    let lhs: f64 = block.iter().map(|x| x.norm_sqr()).sum::<f64>() / spec.p as f64;
    let rhs: f64 = spec.coeffs.iter().map(|c| c.norm_sqr()).sum();
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    }
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
