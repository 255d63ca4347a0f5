//! Condenser p-capacity: exact spherical-ring values, the volume (Maz'ya)
//! and diameter (Kruglikov) lower bounds, and a discrete p-Dirichlet energy
//! minimizer that serves as the brute-force oracle for every bound in the
//! crate.

pub mod solver;

use crate::dims::Exponents;
use crate::error::{Error, Result};
use crate::geom::{dist, Domain, RingCondenser};
use crate::radial::constant_field_ring_integral;

pub use solver::{discrete_p_capacity, GridSolution, SolverSettings};

/// Condenser (A, C): an open set A (ball or box) with a compact subset C
/// (closed ball or box).
#[derive(Debug, Clone, PartialEq)]
pub struct Condenser {
    outer: Domain,
    inner: Domain,
}

impl Condenser {
    pub fn new(outer: Domain, inner: Domain) -> Result<Self> {
        outer.validate()?;
        inner.validate()?;
        if matches!(outer, Domain::Annulus { .. }) || matches!(inner, Domain::Annulus { .. }) {
            return Err(Error::invalid("condenser parts must be balls or boxes"));
        }
        if outer.dim() != inner.dim() {
            return Err(Error::invalid("condenser parts must share a dimension"));
        }
        if !contains_with_gap(&outer, &inner, 0.0) {
            return Err(Error::invalid("condenser needs C strictly inside A"));
        }
        Ok(Condenser { outer, inner })
    }

    /// The spherical ring condenser (B(x0, r2), closed B(x0, r1)).
    pub fn from_ring(ring: &RingCondenser) -> Self {
        Condenser {
            outer: Domain::Ball {
                center: ring.center().to_vec(),
                radius: ring.r2(),
            },
            inner: Domain::Ball {
                center: ring.center().to_vec(),
                radius: ring.r1(),
            },
        }
    }

    pub fn outer(&self) -> &Domain {
        &self.outer
    }

    pub fn inner(&self) -> &Domain {
        &self.inner
    }

    pub fn dim(&self) -> usize {
        self.outer.dim()
    }

    /// Diameter of C (exact for balls and boxes).
    pub fn inner_diameter(&self) -> f64 {
        match &self.inner {
            Domain::Ball { radius, .. } => 2.0 * radius,
            Domain::Box { min, max } => min
                .iter()
                .zip(max)
                .map(|(a, b)| (b - a) * (b - a))
                .sum::<f64>()
                .sqrt(),
            Domain::Annulus { .. } => unreachable!("validated away"),
        }
    }
}

/// Whether `inner` sits inside `outer` with Euclidean margin `gap` (both
/// restricted to balls and boxes).
pub(crate) fn contains_with_gap(outer: &Domain, inner: &Domain, gap: f64) -> bool {
    match (outer, inner) {
        (Domain::Ball { center: ca, radius: ra }, Domain::Ball { center: cc, radius: rc }) => {
            dist(ca, cc) + rc + gap < *ra
        }
        (Domain::Ball { center: ca, radius: ra }, Domain::Box { min, max }) => {
            // every corner of the box inside the ball by the margin
            let n = min.len();
            (0..1usize << n).all(|mask| {
                let corner: Vec<f64> = (0..n)
                    .map(|d| if mask >> d & 1 == 1 { max[d] } else { min[d] })
                    .collect();
                dist(ca, &corner) + gap < *ra
            })
        }
        (Domain::Box { min: amin, max: amax }, Domain::Ball { center: cc, radius: rc }) => cc
            .iter()
            .enumerate()
            .all(|(d, c)| c - rc - gap > amin[d] && c + rc + gap < amax[d]),
        (Domain::Box { min: amin, max: amax }, Domain::Box { min: cmin, max: cmax }) => (0
            ..amin.len())
            .all(|d| cmin[d] - gap > amin[d] && cmax[d] + gap < amax[d]),
        _ => false,
    }
}

/// Exact p-capacity of the spherical ring condenser:
/// `omega_{n-1} (log(r2/r1))^{1-n}` for p = n and
/// `omega_{n-1} ((n-p)/(p-1))^{p-1} |r1^{(p-n)/(p-1)} - r2^{(p-n)/(p-1)}|^{1-p}`
/// otherwise, obtained as `omega / I^{p-1}` with the constant-field integral.
pub fn ring_capacity_exact(ring: &RingCondenser, exps: &Exponents) -> f64 {
    let i = constant_field_ring_integral(ring.r1(), ring.r2(), exps);
    exps.constants().omega / i.powf(exps.p() - 1.0)
}

/// Volume lower bound (1 < p < n):
/// `n Omega_n^{p/n} ((n-p)/(p-1))^{p-1} m(C)^{(n-p)/n}`.
pub fn mazya_lower_bound(m_c: f64, exps: &Exponents) -> Result<f64> {
    if !(exps.p() < exps.nf()) {
        return Err(Error::invalid(format!(
            "volume lower bound needs p < n, got p = {}, n = {}",
            exps.p(),
            exps.n()
        )));
    }
    if !(m_c >= 0.0) {
        return Err(Error::invalid("measure of C must be nonnegative"));
    }
    let n = exps.nf();
    let p = exps.p();
    let omega_n = exps.constants().big_omega;
    Ok(n * omega_n.powf(p / n) * ((n - p) / (p - 1.0)).powf(p - 1.0) * m_c.powf((n - p) / n))
}

/// Diameter lower bound (p > n-1):
/// `(b_n d(C)^p / m(A)^{1-n+p})^{1/(n-1)}` with a dimension constant b_n.
pub fn kruglikov_lower_bound(d_c: f64, m_a: f64, exps: &Exponents, b_n: f64) -> Result<f64> {
    if !(exps.p() > exps.nf() - 1.0) {
        return Err(Error::invalid(format!(
            "diameter lower bound needs p > n - 1, got p = {}, n = {}",
            exps.p(),
            exps.n()
        )));
    }
    if !(d_c >= 0.0 && m_a > 0.0 && b_n > 0.0) {
        return Err(Error::invalid(
            "diameter lower bound needs d(C) >= 0, m(A) > 0 and b_n > 0",
        ));
    }
    let n = exps.nf();
    let p = exps.p();
    Ok((b_n * d_c.powf(p) / m_a.powf(1.0 - n + p)).powf(1.0 / (n - 1.0)))
}

/// Calibration of the diameter-bound constant against the discrete oracle.
#[derive(Debug, Clone)]
pub struct BnCalibration {
    /// The calibrated constant (largest consistent value times the margin).
    pub b_n: f64,
    /// Largest value consistent with the oracle on the reference geometry.
    pub raw: f64,
    pub margin: f64,
    pub reference: String,
}

/// Fits the largest b_n consistent with the discrete oracle on a reference
/// geometry (a thin segment-like box inside the unit ball), scaled by a
/// conservative margin. The bound's shape, not its constant, is the testable
/// content, so the margin guards against the reference not being extremal.
pub fn calibrate_bn(exps: &Exponents, resolution: usize, margin: f64) -> Result<BnCalibration> {
    if !(margin > 0.0 && margin <= 1.0) {
        return Err(Error::invalid("calibration margin must lie in (0, 1]"));
    }
    let n = exps.n() as usize;
    // thin box of length 1 along the first axis, a few cells thick elsewhere
    let thickness = 2.2 / resolution as f64;
    let mut cmin = vec![-thickness; n];
    let mut cmax = vec![thickness; n];
    cmin[0] = -0.5;
    cmax[0] = 0.5;
    let outer = Domain::Ball {
        center: vec![0.0; n],
        radius: 1.0,
    };
    let cond = Condenser::new(outer.clone(), Domain::Box { min: cmin, max: cmax })?;
    let set = SolverSettings {
        resolution,
        ..Default::default()
    };
    let sol = discrete_p_capacity(&cond, exps, &set)?;
    let d_c = cond.inner_diameter();
    let m_a = outer.volume();
    let nf = exps.nf();
    let raw = sol.energy.powf(nf - 1.0) * m_a.powf(1.0 - nf + exps.p()) / d_c.powf(exps.p());
    Ok(BnCalibration {
        b_n: margin * raw,
        raw,
        margin,
        reference: format!("segment-box(len=1, thick={thickness:.4}) in unit ball, res={resolution}"),
    })
}
