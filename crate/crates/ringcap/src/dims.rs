//! Dimension-dependent constants and the exponent pair (n, p).

use crate::error::{Error, Result};
use statrs::function::gamma::gamma;

/// Area of the unit sphere S^{n-1} in R^n: `2 pi^{n/2} / Gamma(n/2)`.
pub fn unit_sphere_area(n: u32) -> f64 {
    assert!(n >= 2, "dimension must be at least 2");
    let nf = f64::from(n);
    2.0 * std::f64::consts::PI.powf(nf / 2.0) / gamma(nf / 2.0)
}

/// Volume of the unit ball in R^n: `pi^{n/2} / Gamma(n/2 + 1)`.
pub fn unit_ball_volume(n: u32) -> f64 {
    assert!(n >= 2, "dimension must be at least 2");
    let nf = f64::from(n);
    std::f64::consts::PI.powf(nf / 2.0) / gamma(nf / 2.0 + 1.0)
}

/// The pair of constants omega_{n-1} (sphere area) and Omega_n (ball volume).
#[derive(Debug, Clone, Copy)]
pub struct DimensionalConstants {
    pub omega: f64,
    pub big_omega: f64,
}

impl DimensionalConstants {
    pub fn new(n: u32) -> Self {
        DimensionalConstants {
            omega: unit_sphere_area(n),
            big_omega: unit_ball_volume(n),
        }
    }
}

/// Dimension n >= 2 and integrability exponent p with 1 < p <= n.
///
/// Operations with stricter needs (p < n for the volume lower bound,
/// p > n-1 for the diameter lower bound) state and check them locally.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents {
    n: u32,
    p: f64,
}

impl Exponents {
    pub fn new(n: u32, p: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("dimension n must be >= 2, got {n}")));
        }
        if !(p > 1.0 && p <= f64::from(n)) {
            return Err(Error::invalid(format!(
                "exponent p must satisfy 1 < p <= n = {n}, got {p}"
            )));
        }
        Ok(Exponents { n, p })
    }

    /// p = n, the conformal case.
    pub fn conformal(n: u32) -> Result<Self> {
        Exponents::new(n, f64::from(n))
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn nf(&self) -> f64 {
        f64::from(self.n)
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Exponent `1/(p-1)` applied to the spherical mean in the ring integral.
    #[inline]
    pub fn mean_exponent(&self) -> f64 {
        1.0 / (self.p - 1.0)
    }

    /// Exponent `(n-1)/(p-1)` applied to the radius in the ring integral.
    #[inline]
    pub fn radius_exponent(&self) -> f64 {
        (self.nf() - 1.0) / (self.p - 1.0)
    }

    pub fn is_conformal(&self) -> bool {
        self.p == self.nf()
    }

    pub fn constants(&self) -> DimensionalConstants {
        DimensionalConstants::new(self.n)
    }
}
