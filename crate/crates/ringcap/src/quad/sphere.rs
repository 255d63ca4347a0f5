//! Quadrature rules on the unit sphere S^{n-1}.
//!
//! Scheme selection follows the dimension: periodic trapezoid on the angle
//! for n = 2, a product of Gauss-Legendre in the polar cosine and uniform
//! azimuth for n = 3, and seeded Monte-Carlo directions for n >= 4. Weights
//! of the deterministic rules sum to the exact sphere area.

use crate::dims::unit_sphere_area;
use crate::error::{Error, Result};
use crate::quad::gauss_legendre;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphereScheme {
    /// n = 2: equally spaced angles, equal weights.
    TrapezoidAngle,
    /// n = 3: Gauss-Legendre in cos(polar) x uniform azimuth.
    ProductGauss,
    /// n >= 4: uniform random directions, equal weights.
    MonteCarlo,
}

/// Precomputed directions and weights; reused across radii and fields.
#[derive(Debug, Clone)]
pub struct SphereRule {
    dim: usize,
    scheme: SphereScheme,
    /// Flattened unit directions, `dim` coordinates per node.
    dirs: Vec<f64>,
    weights: Vec<f64>,
    area: f64,
}

impl SphereRule {
    /// Builds the rule for dimension `n` with at least `node_count` nodes
    /// (exact node placement depends on the scheme). `seed` only matters for
    /// the Monte-Carlo scheme.
    pub fn new(n: usize, node_count: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("sphere rule needs dimension >= 2"));
        }
        if node_count < 16 {
            return Err(Error::invalid(format!(
                "sphere rule needs at least 16 nodes, got {node_count}"
            )));
        }
        let area = unit_sphere_area(n as u32);
        match n {
            2 => {
                let m = node_count;
                let w = area / m as f64;
                let mut dirs = Vec::with_capacity(2 * m);
                for i in 0..m {
                    let theta = 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / m as f64;
                    dirs.push(theta.cos());
                    dirs.push(theta.sin());
                }
                Ok(SphereRule {
                    dim: 2,
                    scheme: SphereScheme::TrapezoidAngle,
                    dirs,
                    weights: vec![w; m],
                    area,
                })
            }
            3 => {
                let m_polar = (((node_count as f64) / 2.0).sqrt().ceil() as usize).max(4);
                let m_az = 2 * m_polar;
                let (mu, wmu) = gauss_legendre(m_polar);
                let waz = 2.0 * std::f64::consts::PI / m_az as f64;
                let mut dirs = Vec::with_capacity(3 * m_polar * m_az);
                let mut weights = Vec::with_capacity(m_polar * m_az);
                for (mui, wi) in mu.iter().zip(&wmu) {
                    let s = (1.0 - mui * mui).max(0.0).sqrt();
                    for j in 0..m_az {
                        let theta = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / m_az as f64;
                        dirs.push(s * theta.cos());
                        dirs.push(s * theta.sin());
                        dirs.push(*mui);
                        weights.push(wi * waz);
                    }
                }
                Ok(SphereRule {
                    dim: 3,
                    scheme: SphereScheme::ProductGauss,
                    dirs,
                    weights,
                    area,
                })
            }
            _ => {
                let m = node_count;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut dirs = Vec::with_capacity(n * m);
                for _ in 0..m {
                    loop {
                        let v: Vec<f64> =
                            (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                        if norm > 1e-12 {
                            dirs.extend(v.iter().map(|c| c / norm));
                            break;
                        }
                    }
                }
                Ok(SphereRule {
                    dim: n,
                    scheme: SphereScheme::MonteCarlo,
                    dirs,
                    weights: vec![area / m as f64; m],
                    area,
                })
            }
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scheme(&self) -> SphereScheme {
        self.scheme
    }

    pub fn node_count(&self) -> usize {
        self.weights.len()
    }

    /// Sum of the weights; equals the area of S^{n-1} (exactly for the
    /// deterministic schemes).
    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Mean of `f` over the sphere `{x0 + t u : |u| = 1}`.
    ///
    /// Infinite samples make the mean infinite; errors propagate.
    pub fn mean<F>(&self, x0: &[f64], t: f64, mut f: F) -> Result<f64>
    where
        F: FnMut(&[f64]) -> Result<f64>,
    {
        debug_assert_eq!(x0.len(), self.dim);
        let mut point = vec![0.0; self.dim];
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            let dir = &self.dirs[i * self.dim..(i + 1) * self.dim];
            for (k, (c, d)) in x0.iter().zip(dir).enumerate() {
                point[k] = c + t * d;
            }
            let v = f(&point)?;
            if v.is_infinite() {
                return Ok(f64::INFINITY);
            }
            acc += w * v;
        }
        Ok(acc / self.area)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn weights_sum_to_sphere_area() {
        for (n, count) in [(2usize, 64usize), (3, 512)] {
            let rule = SphereRule::new(n, count, 0).unwrap();
            let expected = unit_sphere_area(n as u32);
            assert!(
                (rule.weight_sum() - expected).abs() < 1e-10,
                "n={n}: {} vs {expected}",
                rule.weight_sum()
            );
        }
    }

    #[test]
    fn rejects_tiny_rules() {
        assert!(SphereRule::new(2, 8, 0).is_err());
    }

    #[test]
    fn mean_of_constant_is_constant() {
        for n in [2usize, 3, 4] {
            let rule = SphereRule::new(n, 64, 7).unwrap();
            let m = rule.mean(&vec![0.0; n], 2.0, |_| Ok(3.5)).unwrap();
            assert!((m - 3.5).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn mean_of_coordinate_square_n2() {
        // mean of x^2 over the unit circle is 1/2
        let rule = SphereRule::new(2, 64, 0).unwrap();
        let m = rule.mean(&[0.0, 0.0], 1.0, |x| Ok(x[0] * x[0])).unwrap();
        assert!((m - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mean_of_harmonic_vanishes_n3() {
        // x*y is a spherical harmonic; product-Gauss integrates it to 0
        let rule = SphereRule::new(3, 512, 0).unwrap();
        let m = rule.mean(&[0.0, 0.0, 0.0], 1.0, |x| Ok(x[0] * x[1])).unwrap();
        assert!(m.abs() < 1e-12);
    }

    #[test]
    fn smooth_function_n3_accuracy() {
        // mean of exp(z) over S^2 = sinh(1)/1
        let rule = SphereRule::new(3, 2048, 0).unwrap();
        let m = rule.mean(&[0.0, 0.0, 0.0], 1.0, |x| Ok(x[2].exp())).unwrap();
        assert!((m - 1.0_f64.sinh()).abs() < 1e-10, "m={m}");
    }

    #[test]
    fn monte_carlo_is_seed_deterministic() {
        let a = SphereRule::new(4, 256, 42).unwrap();
        let b = SphereRule::new(4, 256, 42).unwrap();
        assert_eq!(a.dirs, b.dirs);
        let pi_mean_a = a.mean(&[0.0; 4], 1.0, |x| Ok(x[0] * x[0])).unwrap();
        let pi_mean_b = b.mean(&[0.0; 4], 1.0, |x| Ok(x[0] * x[0])).unwrap();
        assert_eq!(pi_mean_a, pi_mean_b);
        // crude check against the exact value 1/4
        assert!((pi_mean_a - 0.25).abs() < 0.05, "{pi_mean_a}");
    }

    #[test]
    fn trapezoid_mean_interpretation() {
        // h(x, infinity)-style weight: mean over circle radius 2 about origin
        // of 1/(1+|x|^2)^2 = 1/25 since |x| = 2 on the whole circle.
        let rule = SphereRule::new(2, 32, 0).unwrap();
        let m = rule
            .mean(&[0.0, 0.0], 2.0, |x| {
                let s = 1.0 + x.iter().map(|c| c * c).sum::<f64>();
                Ok(1.0 / (s * s))
            })
            .unwrap();
        assert!((m - 1.0 / 25.0).abs() < 1e-12);
        let _ = PI;
    }
}
