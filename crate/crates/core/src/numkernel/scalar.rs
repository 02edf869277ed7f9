//! Scalar backends.
//!
//! Two fields are supported: exact arbitrary-precision rationals
//! ([`Rational`]) and IEEE doubles (`f64`). Everything above this module is
//! generic over [`Scalar`], so every identity can be checked bit-exactly
//! wherever the inputs are rational.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = num::BigRational;

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// `true` for backends whose ring axioms hold bit-exactly.
    const EXACT: bool;
    /// Short backend label used in reports and error messages.
    const BACKEND: &'static str;

    fn from_i64(v: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    fn to_f64(&self) -> f64;

    /// Exact image of a finite double; `None` for NaN and infinities.
    fn from_f64(v: f64) -> Option<Self>;

    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }

    fn is_positive(&self) -> bool;

    fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Self::one() / self.clone())
        }
    }

    /// Natural exponential, when representable in this field.
    fn exp(&self) -> Option<Self>;

    /// Natural logarithm, when representable in this field.
    fn ln(&self) -> Option<Self>;

    /// Whether `self` and `other` agree: bit-exact on exact backends, within
    /// `rel_tol` (relative to max(1, |a|, |b|)) otherwise.
    fn approx_eq(&self, other: &Self, rel_tol: f64) -> bool {
        if Self::EXACT {
            self == other
        } else {
            let scale = 1f64.max(self.magnitude()).max(other.magnitude());
            (self.clone() - other.clone()).magnitude() <= rel_tol * scale
        }
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;
    const BACKEND: &'static str = "exact";

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        // BigRational::to_f64 handles huge numerators/denominators gracefully
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_f64(v: f64) -> Option<Self> {
        Rational::from_float(v)
    }

    fn magnitude(&self) -> f64 {
        Scalar::to_f64(&Signed::abs(self))
    }

    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }

    fn exp(&self) -> Option<Self> {
        self.is_zero().then(Self::one)
    }

    fn ln(&self) -> Option<Self> {
        self.is_one().then(Self::zero)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const BACKEND: &'static str = "float";

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_f64(v: f64) -> Option<Self> {
        v.is_finite().then_some(v)
    }

    fn is_positive(&self) -> bool {
        *self > 0.0
    }

    fn exp(&self) -> Option<Self> {
        Some(f64::exp(*self))
    }

    fn ln(&self) -> Option<Self> {
        (*self > 0.0).then(|| f64::ln(*self))
    }
}

/// Parses `"3"`, `"-3/4"` or a decimal literal such as `"0.25"` into a scalar.
///
/// Decimal literals are converted exactly (`0.25` becomes `1/4`) so that
/// scenario files written by hand stay on the exact backend.
pub fn parse_scalar<S: Scalar>(text: &str) -> Option<S> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(S::from_ratio(n, d));
    }
    if let Ok(v) = text.parse::<i64>() {
        return Some(S::from_i64(v));
    }
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int_part, frac_part) = body.split_once('.')?;
    if frac_part.len() > 15 || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let int: i64 = if int_part.is_empty() { 0 } else { int_part.parse().ok()? };
    let den = 10i64.checked_pow(frac_part.len() as u32)?;
    let frac: i64 = if frac_part.is_empty() { 0 } else { frac_part.parse().ok()? };
    let num = int.checked_mul(den)?.checked_add(frac)?;
    let v = S::from_ratio(num, den);
    Some(if neg { -v } else { v })
}
