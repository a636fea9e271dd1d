//! Numeric foundation: exact rationals for probabilities and press timing,
//! plus a utility scalar that is either `f64` (fast, figure runs) or
//! `BigRational` (exact, verification runs).

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Exact rational used for probabilities, press times, and reward parameters.
pub type Q = Ratio<i64>;

pub fn q(num: i64, den: i64) -> Q {
    Q::new(num, den)
}

pub fn q_int(n: i64) -> Q {
    Q::from_integer(n)
}

/// Parses a plain decimal literal ("0.6", "-10000", "1.01") into an exact rational.
pub fn parse_q(s: &str) -> Result<Q, String> {
    let s = s.trim();
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1i64, rest),
        None => (1i64, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() {
        return Err(format!("empty number: {s:?}"));
    }
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(format!("not a decimal number: {s:?}"));
    }
    if frac_part.len() > 12 {
        return Err(format!("too many decimal places: {s:?}"));
    }
    let int_val: i64 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().map_err(|e| format!("{s:?}: {e}"))?
    };
    let den = 10i64.pow(frac_part.len() as u32);
    let frac_val: i64 = if frac_part.is_empty() {
        0
    } else {
        frac_part.parse().map_err(|e| format!("{s:?}: {e}"))?
    };
    Ok(Q::new(sign * (int_val * den + frac_val), den))
}

pub fn format_q(v: &Q) -> String {
    if v.is_integer() {
        format!("{}", v.numer())
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

/// Utility scalar abstraction. `f64` is the default; `BigRational` gives
/// bit-exact values for verification runs.
pub trait Utility:
    Clone
    + PartialOrd
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + fmt::Debug
    + Send
    + Sync
    + 'static
{
    const EXACT: bool;

    fn zero() -> Self;
    fn from_q(v: Q) -> Self;
    fn from_int(v: i64) -> Self;
    /// Scales by an exact rational weight (probability or reward parameter).
    fn scale_q(&self, w: Q) -> Self;
    fn to_f64(&self) -> f64;
    /// Tie / equality test. Relative tolerance applies to the `f64` mode only;
    /// exact mode compares structurally.
    fn close_to(&self, other: &Self, rel_tol: f64) -> bool;
}

impl Utility for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn from_q(v: Q) -> Self {
        *v.numer() as f64 / *v.denom() as f64
    }
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn scale_q(&self, w: Q) -> Self {
        self * f64::from_q(w)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn close_to(&self, other: &Self, rel_tol: f64) -> bool {
        let diff = (self - other).abs();
        let mag = self.abs().max(other.abs());
        diff <= (rel_tol * mag).max(1e-12)
    }
}

impl Utility for BigRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn from_q(v: Q) -> Self {
        BigRational::new(BigInt::from(*v.numer()), BigInt::from(*v.denom()))
    }
    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn scale_q(&self, w: Q) -> Self {
        self * Self::from_q(w)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn close_to(&self, other: &Self, _rel_tol: f64) -> bool {
        self == other
    }
}
