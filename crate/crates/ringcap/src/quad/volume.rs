//! Integrals of scalar functions over balls, annuli and boxes.
//!
//! Dimensions 2 and 3 use a radial factor (adaptive Gauss-Legendre, improper
//! handling at the center) times sphere means, or tensor Gauss-Legendre for
//! boxes. Dimensions >= 4 fall back to Sobol quasi-Monte-Carlo over the
//! bounding box with a membership indicator.

use crate::dims::unit_sphere_area;
use crate::error::Result;
use crate::geom::Domain;
use crate::quad::sobol::SobolSeq;
use crate::quad::sphere::SphereRule;
use crate::quad::{integrate_adaptive, integrate_improper_at_zero, AdaptiveSettings, QuadEstimate};

/// Controls for domain integrals.
#[derive(Debug, Clone, Copy)]
pub struct VolumeSettings {
    pub adaptive: AdaptiveSettings,
    pub sphere_nodes: usize,
    pub seed: u64,
    /// Sample count for the quasi-Monte-Carlo path (n >= 4).
    pub qmc_points: usize,
    /// Cap on total evaluations for tensor box quadrature.
    pub box_eval_cap: usize,
}

impl Default for VolumeSettings {
    fn default() -> Self {
        VolumeSettings {
            adaptive: AdaptiveSettings {
                rel_tol: 1e-9,
                initial_panels: 8,
                max_nodes: 1 << 18,
            },
            sphere_nodes: 512,
            seed: 0,
            qmc_points: 1 << 20,
            box_eval_cap: 1 << 22,
        }
    }
}

/// Integral of `f` over the domain. The estimate's `diverging` flag marks
/// non-integrable behavior (the value is then +inf).
pub fn integrate_domain<F>(domain: &Domain, set: &VolumeSettings, mut f: F) -> Result<QuadEstimate>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    domain.validate()?;
    let n = domain.dim();
    if n >= 4 {
        return integrate_qmc(domain, set, f);
    }
    match domain {
        Domain::Ball { center, radius } => {
            let rule = SphereRule::new(n, set.sphere_nodes, set.seed)?;
            let area = unit_sphere_area(n as u32);
            integrate_improper_at_zero(
                |r| {
                    let mean = rule.mean(center, r, &mut f)?;
                    Ok(area * r.powi(n as i32 - 1) * mean)
                },
                *radius,
                &set.adaptive,
            )
        }
        Domain::Annulus { center, r1, r2 } => {
            let rule = SphereRule::new(n, set.sphere_nodes, set.seed)?;
            let area = unit_sphere_area(n as u32);
            let radial = |r: f64| -> Result<f64> {
                let mean = rule.mean(center, r, &mut f)?;
                Ok(area * r.powi(n as i32 - 1) * mean)
            };
            if *r1 == 0.0 {
                integrate_improper_at_zero(radial, *r2, &set.adaptive)
            } else {
                integrate_adaptive(radial, *r1, *r2, &set.adaptive)
            }
        }
        Domain::Box { min, max } => integrate_box(min, max, set, f),
    }
}

fn integrate_box<F>(min: &[f64], max: &[f64], set: &VolumeSettings, mut f: F) -> Result<QuadEstimate>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = min.len();
    let (nodes, weights) = crate::quad::gauss_legendre(8);
    let mut panels = 2usize;
    let mut prev: Option<f64> = None;
    let mut total_evals = 0usize;
    loop {
        let per_axis = panels * nodes.len();
        let evals = per_axis.pow(n as u32);
        total_evals += evals;
        // 1D nodes/weights per axis at this refinement
        let mut axis_nodes: Vec<Vec<(f64, f64)>> = Vec::with_capacity(n);
        for d in 0..n {
            let h = (max[d] - min[d]) / panels as f64;
            let mut v = Vec::with_capacity(per_axis);
            for p in 0..panels {
                let mid = min[d] + (p as f64 + 0.5) * h;
                for (x, w) in nodes.iter().zip(&weights) {
                    v.push((mid + 0.5 * h * x, w * 0.5 * h));
                }
            }
            axis_nodes.push(v);
        }
        let mut est = 0.0;
        let mut x = vec![0.0; n];
        let mut idx = vec![0usize; n];
        let mut finite = true;
        'outer: loop {
            let mut w = 1.0;
            for d in 0..n {
                let (xi, wi) = axis_nodes[d][idx[d]];
                x[d] = xi;
                w *= wi;
            }
            let v = f(&x)?;
            if !v.is_finite() {
                finite = false;
                break;
            }
            est += w * v;
            // odometer increment
            let mut d = 0;
            loop {
                idx[d] += 1;
                if idx[d] < per_axis {
                    break;
                }
                idx[d] = 0;
                d += 1;
                if d == n {
                    break 'outer;
                }
            }
        }
        if !finite {
            return Ok(QuadEstimate {
                value: f64::INFINITY,
                rel_change: f64::INFINITY,
                converged: false,
                diverging: true,
                nodes: total_evals,
            });
        }
        if let Some(old) = prev {
            let scale = est.abs().max(old.abs()).max(f64::MIN_POSITIVE);
            let rel = (est - old).abs() / scale;
            let next_evals = (2 * panels * nodes.len()).pow(n as u32);
            if rel <= set.adaptive.rel_tol || total_evals + next_evals > set.box_eval_cap {
                return Ok(QuadEstimate {
                    value: est,
                    rel_change: rel,
                    converged: rel <= set.adaptive.rel_tol,
                    diverging: false,
                    nodes: total_evals,
                });
            }
        }
        prev = Some(est);
        panels *= 2;
    }
}

fn integrate_qmc<F>(domain: &Domain, set: &VolumeSettings, mut f: F) -> Result<QuadEstimate>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = domain.dim();
    let (lo, hi) = domain.bounding_box();
    let vol_box: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    let mut seq = SobolSeq::new(n);
    let mut unit = vec![0.0; n];
    let mut x = vec![0.0; n];
    let m = set.qmc_points;
    let mut acc = 0.0;
    let mut half1 = 0.0;
    for k in 0..m {
        seq.next_point(&mut unit);
        for d in 0..n {
            x[d] = lo[d] + unit[d] * (hi[d] - lo[d]);
        }
        if !domain.contains(&x) {
            continue;
        }
        let v = f(&x)?;
        if !v.is_finite() {
            return Ok(QuadEstimate {
                value: f64::INFINITY,
                rel_change: f64::INFINITY,
                converged: false,
                diverging: true,
                nodes: k + 1,
            });
        }
        acc += v;
        if k == m / 2 - 1 {
            half1 = acc;
        }
    }
    let value = vol_box * acc / m as f64;
    // Compare the two halves as a crude settledness measure.
    let est_half = vol_box * half1 / (m / 2) as f64;
    let scale = value.abs().max(est_half.abs()).max(f64::MIN_POSITIVE);
    let rel = (value - est_half).abs() / scale;
    Ok(QuadEstimate {
        value,
        rel_change: rel,
        converged: true,
        diverging: false,
        nodes: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ball_volume_recovered() {
        let set = VolumeSettings::default();
        for n in [2usize, 3] {
            let ball = Domain::Ball {
                center: vec![0.25; n],
                radius: 1.0,
            };
            let est = integrate_domain(&ball, &set, |_| Ok(1.0)).unwrap();
            assert!(est.converged);
            assert!(
                (est.value - ball.volume()).abs() < 1e-8 * ball.volume(),
                "n={n}: {} vs {}",
                est.value,
                ball.volume()
            );
        }
    }

    #[test]
    fn weighted_disk_integral_closed_form() {
        // integral over B(0,1) in R^2 of (1+|x|^2)^{-2} = pi/2
        let set = VolumeSettings::default();
        let ball = Domain::Ball {
            center: vec![0.0, 0.0],
            radius: 1.0,
        };
        let est = integrate_domain(&ball, &set, |x| {
            let s = 1.0 + x.iter().map(|c| c * c).sum::<f64>();
            Ok(1.0 / (s * s))
        })
        .unwrap();
        assert!((est.value - PI / 2.0).abs() < 1e-9, "got {}", est.value);
    }

    #[test]
    fn box_integral_smooth() {
        let set = VolumeSettings::default();
        let bx = Domain::Box {
            min: vec![0.0, 0.0],
            max: vec![1.0, 2.0],
        };
        // integral of x*y over [0,1]x[0,2] = (1/2)*(2) = 1
        let est = integrate_domain(&bx, &set, |x| Ok(x[0] * x[1])).unwrap();
        assert!((est.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn qmc_ball_volume_dimension_four() {
        let mut set = VolumeSettings::default();
        set.qmc_points = 1 << 18;
        let ball = Domain::Ball {
            center: vec![0.0; 4],
            radius: 1.0,
        };
        let est = integrate_domain(&ball, &set, |_| Ok(1.0)).unwrap();
        let exact = ball.volume();
        assert!(
            (est.value - exact).abs() < 5e-3 * exact,
            "{} vs {exact}",
            est.value
        );
    }

    #[test]
    fn divergent_center_singularity_flagged() {
        // 1/|x|^3 is not integrable near the origin of R^2
        let set = VolumeSettings::default();
        let ball = Domain::Ball {
            center: vec![0.0, 0.0],
            radius: 1.0,
        };
        let est = integrate_domain(&ball, &set, |x| {
            let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
            Ok(r.powi(-3))
        })
        .unwrap();
        assert!(est.diverging);
    }
}
