//! Scalar abstraction shared by the exact and floating code paths.
//!
//! Everything that is a closed-form formula (the h statistic, exponent
//! recursions, enumeration weights) is written once against [`Scalar`] and
//! instantiated either with `f64`/`f32` for Monte Carlo work or with
//! [`crate::Rational`] when the answer has to be exact.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Num + Clone + PartialOrd + Debug + Send + Sync + std::ops::Neg<Output = Self>
{
    fn from_i64(value: i64) -> Self;

    fn from_ratio(numer: i64, denom: i64) -> Self {
        Self::from_i64(numer) / Self::from_i64(denom)
    }

    fn to_f64(&self) -> f64;

    fn abs_value(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// `self^exp` by repeated squaring.
    fn powu(&self, mut exp: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            exp >>= 1;
        }
        acc
    }

    /// True for values strictly between zero and one.
    fn is_open_unit(&self) -> bool {
        *self > Self::zero() && *self < Self::one()
    }
}

impl Scalar for f64 {
    fn from_i64(value: i64) -> Self {
        value as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn from_i64(value: i64) -> Self {
        value as f32
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }
}

impl Scalar for BigRational {
    fn from_i64(value: i64) -> Self {
        BigRational::from_integer(BigInt::from(value))
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        BigRational::new(BigInt::from(numer), BigInt::from(denom))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            if self.is_negative() {
                f64::NEG_INFINITY
            } else if self.is_zero() {
                0.0
            } else {
                f64::INFINITY
            }
        })
    }

    fn abs_value(&self) -> Self {
        self.abs()
    }
}

/// Parses `"a/b"`, `"a"` or a terminating decimal like `"0.25"` into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(BigRational::new(num, den));
    }
    if let Some((int_part, frac_part)) = text.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = int_part.starts_with('-');
        let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac_part);
        let mut numer: BigInt = digits.parse().ok()?;
        if negative {
            numer = -numer;
        }
        let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
        return Some(BigRational::new(numer, denom));
    }
    let value: BigInt = text.parse().ok()?;
    Some(BigRational::from_integer(value))
}

/// Smallest integer strictly greater than `value`.
pub fn strict_integer_above(value: &BigRational) -> BigInt {
    if value.is_integer() {
        value.to_integer() + BigInt::one()
    } else {
        value.ceil().to_integer()
    }
}
