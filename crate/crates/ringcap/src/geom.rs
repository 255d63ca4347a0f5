//! Geometric primitives: ring condensers and quadrature-supported domains.

use crate::dims::unit_ball_volume;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Spherical ring `{ r1 < |x - x0| < r2 }` about a finite center.
#[derive(Debug, Clone, PartialEq)]
pub struct RingCondenser {
    x0: Vec<f64>,
    r1: f64,
    r2: f64,
}

impl RingCondenser {
    pub fn new(x0: Vec<f64>, r1: f64, r2: f64) -> Result<Self> {
        if x0.len() < 2 {
            return Err(Error::invalid("ring center must live in R^n with n >= 2"));
        }
        if x0.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("ring center must be finite"));
        }
        if !(r1 > 0.0 && r1.is_finite()) {
            return Err(Error::invalid(format!("inner radius must be positive and finite, got {r1}")));
        }
        if !(r2 > r1 && r2.is_finite()) {
            return Err(Error::invalid(format!(
                "outer radius must satisfy r1 < r2 < inf, got r1={r1}, r2={r2}"
            )));
        }
        Ok(RingCondenser { x0, r1, r2 })
    }

    #[inline]
    pub fn center(&self) -> &[f64] {
        &self.x0
    }

    #[inline]
    pub fn r1(&self) -> f64 {
        self.r1
    }

    #[inline]
    pub fn r2(&self) -> f64 {
        self.r2
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.x0.len()
    }
}

/// Quadrature-supported region of R^n: ball, annulus, or axis-aligned box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Domain {
    Ball { center: Vec<f64>, radius: f64 },
    Annulus { center: Vec<f64>, r1: f64, r2: f64 },
    Box { min: Vec<f64>, max: Vec<f64> },
}

impl Domain {
    pub fn validate(&self) -> Result<()> {
        match self {
            Domain::Ball { center, radius } => {
                if center.len() < 2 || center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::invalid("ball center must be finite with n >= 2"));
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::invalid("ball radius must be positive and finite"));
                }
            }
            Domain::Annulus { center, r1, r2 } => {
                if center.len() < 2 || center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::invalid("annulus center must be finite with n >= 2"));
                }
                if !(*r1 >= 0.0 && r2 > r1 && r2.is_finite()) {
                    return Err(Error::invalid("annulus radii must satisfy 0 <= r1 < r2 < inf"));
                }
            }
            Domain::Box { min, max } => {
                if min.len() < 2 || min.len() != max.len() {
                    return Err(Error::invalid("box bounds must share a dimension n >= 2"));
                }
                for (lo, hi) in min.iter().zip(max) {
                    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                        return Err(Error::invalid("box bounds must be finite with min < max"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Ball { center, .. } | Domain::Annulus { center, .. } => center.len(),
            Domain::Box { min, .. } => min.len(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Domain::Ball { center, radius } => dist(x, center) < *radius,
            Domain::Annulus { center, r1, r2 } => {
                let d = dist(x, center);
                d > *r1 && d < *r2
            }
            Domain::Box { min, max } => x
                .iter()
                .zip(min.iter().zip(max))
                .all(|(xi, (lo, hi))| xi >= lo && xi <= hi),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Domain::Ball { center, radius } => {
                unit_ball_volume(center.len() as u32) * radius.powi(center.len() as i32)
            }
            Domain::Annulus { center, r1, r2 } => {
                let n = center.len() as i32;
                unit_ball_volume(center.len() as u32) * (r2.powi(n) - r1.powi(n))
            }
            Domain::Box { min, max } => min
                .iter()
                .zip(max)
                .map(|(lo, hi)| hi - lo)
                .product(),
        }
    }

    /// Axis-aligned bounding box as (min, max) corner vectors.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Domain::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            Domain::Annulus { center, r2, .. } => (
                center.iter().map(|c| c - r2).collect(),
                center.iter().map(|c| c + r2).collect(),
            ),
            Domain::Box { min, max } => (min.clone(), max.clone()),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Domain::Ball { center, radius } => format!("ball(center={center:?}, radius={radius})"),
            Domain::Annulus { center, r1, r2 } => {
                format!("annulus(center={center:?}, r1={r1}, r2={r2})")
            }
            Domain::Box { min, max } => format!("box(min={min:?}, max={max:?})"),
        }
    }
}

/// Euclidean distance between two points of equal dimension.
pub fn dist(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Euclidean norm.
pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_rejects_bad_radii() {
        assert!(RingCondenser::new(vec![0.0, 0.0], 1.0, 2.0).is_ok());
        assert!(RingCondenser::new(vec![0.0, 0.0], 2.0, 1.0).is_err());
        assert!(RingCondenser::new(vec![0.0, 0.0], 1.0, 1.0).is_err());
        assert!(RingCondenser::new(vec![0.0, 0.0], 0.0, 1.0).is_err());
        assert!(RingCondenser::new(vec![0.0, 0.0], -1.0, 1.0).is_err());
        assert!(RingCondenser::new(vec![0.0, 0.0], 1.0, f64::INFINITY).is_err());
        assert!(RingCondenser::new(vec![f64::NAN, 0.0], 1.0, 2.0).is_err());
    }

    #[test]
    fn domain_membership_and_volume() {
        let ball = Domain::Ball {
            center: vec![0.0, 0.0],
            radius: 1.0,
        };
        assert!(ball.contains(&[0.5, 0.0]));
        assert!(!ball.contains(&[1.5, 0.0]));
        assert!((ball.volume() - std::f64::consts::PI).abs() < 1e-12);

        let shell = Domain::Annulus {
            center: vec![0.0, 0.0, 0.0],
            r1: 1.0,
            r2: 2.0,
        };
        assert!(shell.contains(&[1.5, 0.0, 0.0]));
        assert!(!shell.contains(&[0.5, 0.0, 0.0]));
        let expected = unit_ball_volume(3) * (8.0 - 1.0);
        assert!((shell.volume() - expected).abs() < 1e-12);

        let bx = Domain::Box {
            min: vec![0.0, 0.0],
            max: vec![2.0, 3.0],
        };
        assert!(bx.contains(&[1.0, 1.0]));
        assert!(!bx.contains(&[2.5, 1.0]));
        assert_eq!(bx.volume(), 6.0);
    }
}
