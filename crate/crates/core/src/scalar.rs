//! Number types used by every computation in the crate.
//!
//! The canonical mode is exact rational arithmetic ([`Rational`]); `f64` is
//! provided as an approximate mode for large randomized runs. A single
//! computation never mixes the two: every routine is generic over one
//! [`Scalar`].

use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::float::FloatCore;
use num_traits::{Num, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational, always kept in lowest terms.
pub type Rational = BigRational;

/// Relative tolerance used in approximate mode, multiplied by the problem scale.
pub const FLOAT_RELATIVE_EPSILON: f64 = 1e-9;

pub trait Scalar:
    Clone + PartialOrd + fmt::Debug + fmt::Display + Num + Signed + Send + Sync + 'static
{
    /// `true` when arithmetic is exact and comparisons need no tolerance.
    const EXACT: bool;

    fn from_i64(value: i64) -> Self;

    fn ratio(numer: i64, denom: i64) -> Self;

    fn to_f64(&self) -> f64;

    fn from_rational(value: &Rational) -> Self;

    /// Absolute tolerance for quantities of magnitude `scale`.
    fn epsilon_for(scale: &Self) -> Self;

    /// Strictly greater than zero. Unlike `Signed::is_positive`, false for
    /// `+0.0`.
    fn gt_zero(&self) -> bool {
        *self > Self::zero()
    }

    fn lt_zero(&self) -> bool {
        *self < Self::zero()
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_i64(value: i64) -> Self {
        Rational::from_integer(BigInt::from(value))
    }

    fn ratio(numer: i64, denom: i64) -> Self {
        Rational::new(BigInt::from(numer), BigInt::from(denom))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_rational(value: &Rational) -> Self {
        value.clone()
    }

    fn epsilon_for(_scale: &Self) -> Self {
        Rational::zero()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(value: i64) -> Self {
        value as f64
    }

    fn ratio(numer: i64, denom: i64) -> Self {
        numer as f64 / denom as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_rational(value: &Rational) -> Self {
        ToPrimitive::to_f64(value).unwrap_or(f64::NAN)
    }

    fn epsilon_for(scale: &Self) -> Self {
        FLOAT_RELATIVE_EPSILON * FloatCore::abs(*scale).max(1.0)
    }
}

/// Comparison helper carrying the absolute tolerance of one computation.
///
/// In exact mode the tolerance is zero and every test below is an exact
/// comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct Tolerance<S> {
    eps: S,
}

impl<S: Scalar> Tolerance<S> {
    pub fn new(eps: S) -> Self {
        Tolerance { eps: eps.abs() }
    }

    pub fn exact() -> Self {
        Tolerance { eps: S::zero() }
    }

    /// Tolerance for values of magnitude up to `scale`.
    pub fn scaled(scale: &S) -> Self {
        Tolerance::new(S::epsilon_for(scale))
    }

    pub fn eps(&self) -> &S {
        &self.eps
    }

    pub fn is_zero(&self, x: &S) -> bool {
        x.abs() <= self.eps
    }

    pub fn is_positive(&self, x: &S) -> bool {
        *x > self.eps
    }

    pub fn is_negative(&self, x: &S) -> bool {
        *x < -self.eps.clone()
    }

    /// `a <= b` up to the tolerance.
    pub fn le(&self, a: &S, b: &S) -> bool {
        a.clone() <= b.clone() + self.eps.clone()
    }

    pub fn eq(&self, a: &S, b: &S) -> bool {
        self.is_zero(&(a.clone() - b.clone()))
    }
}

/// Converts an exact rational into the requested scalar type.
pub fn from_rational<S: Scalar>(value: &Rational) -> S {
    S::from_rational(value)
}

pub fn rational_from_f64(value: f64) -> Option<Rational> {
    Rational::from_float(value)
}

pub fn sum<S: Scalar, I: IntoIterator<Item = S>>(values: I) -> S {
    values.into_iter().fold(S::zero(), |acc, v| acc + v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_are_canonical() {
        let a = Rational::ratio(100, 6);
        assert_eq!(a, Rational::ratio(50, 3));
        assert_eq!(*a.numer(), BigInt::from(50));
        assert_eq!(*a.denom(), BigInt::from(3));
    }

    #[test]
    fn conversion_roundtrips_through_both_modes() {
        let x = Rational::ratio(-2350, 3);
        let exact: Rational = from_rational(&x);
        assert_eq!(exact, x);
        let approx: f64 = from_rational(&x);
        assert!((approx + 783.333_333_333).abs() < 1e-6);
        let big = Rational::new(
            BigInt::from(1u64 << 62) * BigInt::from(12345),
            BigInt::from(7),
        );
        assert_eq!(from_rational::<Rational>(&big), big);
    }

    #[test]
    fn tolerance_is_zero_in_exact_mode() {
        let tol = Tolerance::<Rational>::scaled(&Rational::from_i64(1400));
        assert!(tol.eps().is_zero());
        assert!(!tol.is_zero(&Rational::ratio(1, 1_000_000_000)));
        let ftol = Tolerance::<f64>::scaled(&1400.0);
        assert!((ftol.eps() - 1.4e-6).abs() < 1e-18);
        assert!(ftol.is_zero(&1e-7));
        assert!(ftol.le(&400.000_000_1, &400.0));
    }
}
