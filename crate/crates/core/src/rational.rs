//! Exact rational helpers and the `{"num": "...", "den": "..."}` wire form.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int<T: Into<BigInt>>(n: T) -> Rational {
    Rational::from_integer(n.into())
}

/// `base^exp` for a non-negative integer exponent.
pub fn pow(base: &Rational, exp: u32) -> Rational {
    num_traits::pow(base.clone(), exp as usize)
}

/// Largest integer `<= r`.
pub fn floor(r: &Rational) -> BigInt {
    r.numer().div_floor(r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Scale down very large operands before converting.
            let bits = r.numer().bits().max(r.denom().bits()) as i64;
            let shift = (bits - 900).max(0) as usize;
            let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

/// Exact conversion of a finite binary64 value.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

pub fn is_positive(r: &Rational) -> bool {
    r.is_positive()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn zero() -> Rational {
    Rational::zero()
}

#[derive(Serialize, Deserialize)]
struct Wire {
    num: String,
    den: String,
}

/// Parse the wire form. The denominator must be nonzero; the value is reduced.
pub fn parse_wire(num: &str, den: &str) -> Result<Rational, String> {
    let n: BigInt = num
        .trim()
        .parse()
        .map_err(|_| format!("bad numerator {num:?}"))?;
    let d: BigInt = den
        .trim()
        .parse()
        .map_err(|_| format!("bad denominator {den:?}"))?;
    if d.is_zero() {
        return Err("zero denominator".into());
    }
    Ok(Rational::new(n, d))
}

/// Parse `a/b`, an integer, or a finite decimal such as `0.125` exactly.
pub fn parse_text(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        return parse_wire(n, d);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (ip, fp) = body.split_once('.').unwrap_or((body, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(format!("bad number {s:?}"));
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return Err(format!("bad number {s:?}"));
    }
    if fp.len() > 4096 {
        return Err("too many fractional digits".into());
    }
    let digits = format!("{ip}{fp}");
    let n: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| format!("bad number {s:?}"))?
    };
    let d = num_traits::pow(BigInt::from(10), fp.len());
    let r = Rational::new(n, d);
    Ok(if neg { -r } else { r })
}

pub mod wire {
    //! `#[serde(with = "...")]` adapter for a single rational.
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        Wire {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let w = Wire::deserialize(d)?;
        parse_wire(&w.num, &w.den).map_err(de::Error::custom)
    }
}

pub mod wire_vec {
    //! `#[serde(with = "...")]` adapter for a list of rationals.
    use super::*;

    #[derive(Serialize)]
    struct Ref<'a>(#[serde(with = "super::wire")] &'a Rational);

    #[derive(Deserialize)]
    struct Own(#[serde(with = "super::wire")] Rational);

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(Ref))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let v: Vec<Own> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|o| o.0).collect())
    }
}

pub mod wire_ref {
    //! Serialize-only adapter for borrowed rationals in report rows.
    use super::*;

    pub fn serialize<S: Serializer>(r: &&Rational, s: S) -> Result<S::Ok, S::Error> {
        super::wire::serialize(r, s)
    }
}
