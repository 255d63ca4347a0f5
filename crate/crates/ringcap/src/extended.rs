//! Extended nonnegative values and the division conventions used throughout.
//!
//! The conventions are: `a/inf = 0` for finite `a`, `a/0 = inf` for `a > 0`,
//! and `0/0 = 0` (the natural extension of `0 * inf = 0`, which keeps
//! integrands zero where both numerator and mean vanish). `inf/inf` has no
//! meaning and is rejected.

use crate::error::{Error, Result};

/// A value in `[0, +inf]`. Plain `f64` infinity represents the infinite
/// state; comparisons order it above every finite value.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
#[repr(transparent)]
pub struct ExtendedNonneg(f64);

impl ExtendedNonneg {
    pub const ZERO: Self = ExtendedNonneg(0.0);
    pub const INFINITY: Self = ExtendedNonneg(f64::INFINITY);

    /// Wraps a nonnegative value; rejects NaN and negatives.
    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(Error::invalid(format!(
                "extended nonnegative value must be in [0, inf], got {value}"
            )));
        }
        Ok(ExtendedNonneg(value))
    }

    /// Wraps a value known to be nonnegative.
    ///
    /// Debug builds assert the invariant; hot numeric paths use this to skip
    /// the branch in release builds.
    #[inline]
    pub fn new_unchecked(value: f64) -> Self {
        debug_assert!(!value.is_nan() && value >= 0.0);
        ExtendedNonneg(value)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    #[inline]
    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }

    /// Raises to a real power, staying inside `[0, inf]`.
    /// `inf^e = inf` for `e > 0`, `x^0 = 1`, `0^e = 0` for `e > 0`.
    pub fn powf(self, e: f64) -> ExtendedNonneg {
        if e == 0.0 {
            return ExtendedNonneg(1.0);
        }
        ExtendedNonneg(self.0.powf(e))
    }
}

impl std::fmt::Display for ExtendedNonneg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Extended division with the fixed conventions.
///
/// `a/inf = 0` for finite `a`, `a/0 = inf` for `a > 0`, `0/0 = 0`;
/// `inf/inf` is rejected as undefined input.
pub fn ext_div(a: ExtendedNonneg, b: ExtendedNonneg) -> Result<ExtendedNonneg> {
    if a.is_infinite() && b.is_infinite() {
        return Err(Error::invalid("inf/inf is undefined"));
    }
    if b.is_infinite() {
        return Ok(ExtendedNonneg::ZERO);
    }
    if b.is_zero() {
        return Ok(if a.is_zero() {
            ExtendedNonneg::ZERO
        } else {
            ExtendedNonneg::INFINITY
        });
    }
    Ok(ExtendedNonneg(a.value() / b.value()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_over_infinity_is_zero() {
        let r = ext_div(
            ExtendedNonneg::new(5.0).unwrap(),
            ExtendedNonneg::INFINITY,
        )
        .unwrap();
        assert_eq!(r.value(), 0.0);
    }

    #[test]
    fn positive_over_zero_is_infinity() {
        let r = ext_div(ExtendedNonneg::new(3.0).unwrap(), ExtendedNonneg::ZERO).unwrap();
        assert!(r.is_infinite());
    }

    #[test]
    fn ordinary_division() {
        let r = ext_div(
            ExtendedNonneg::new(6.0).unwrap(),
            ExtendedNonneg::new(2.0).unwrap(),
        )
        .unwrap();
        assert_eq!(r.value(), 3.0);
    }

    #[test]
    fn zero_over_zero_is_zero() {
        let r = ext_div(ExtendedNonneg::ZERO, ExtendedNonneg::ZERO).unwrap();
        assert_eq!(r.value(), 0.0);
    }

    #[test]
    fn inf_over_inf_rejected() {
        assert!(ext_div(ExtendedNonneg::INFINITY, ExtendedNonneg::INFINITY).is_err());
    }

    #[test]
    fn rejects_negative_and_nan() {
        assert!(ExtendedNonneg::new(-1.0).is_err());
        assert!(ExtendedNonneg::new(f64::NAN).is_err());
    }

    #[test]
    fn infinity_totally_ordered_above_finites() {
        assert!(ExtendedNonneg::INFINITY > ExtendedNonneg::new(1e300).unwrap());
    }
}
