//! Spherical means, the radial ring integral and the modulus/capacity upper
//! bound built from it.
//!
//! For a nonnegative field Q and center x0, `q(t)` is the mean of Q over the
//! sphere of radius t. The ring integral is
//! `I = int_{r1}^{r2} dr / (r^{(n-1)/(p-1)} q(r)^{1/(p-1)})`,
//! computed on a log-spaced radial grid with panel doubling. Radii where the
//! mean vanishes follow the extended conventions: a whole interval of zeros
//! makes I infinite, isolated zeros are excluded as an improper limit. The
//! bound `omega_{n-1} / I^{p-1}` then caps both the image path-family
//! modulus and the image condenser capacity, with I = inf giving 0 and
//! I = 0 giving inf.

use crate::dims::Exponents;
use crate::error::{Error, Result};
use crate::extended::{ext_div, ExtendedNonneg};
use crate::fields::Field;
use crate::geom::RingCondenser;
use crate::quad::sphere::SphereRule;
use crate::quad::{integrate_adaptive, AdaptiveSettings};

/// Controls for radial quadrature.
#[derive(Debug, Clone, Copy)]
pub struct RadialSettings {
    /// Initial radial panel count (doubles until converged). Minimum 32.
    pub resolution: usize,
    /// Relative tolerance for the panel-doubling loop.
    pub rel_tol: f64,
    /// Cap on radial integrand evaluations.
    pub max_nodes: usize,
    /// Sphere-rule node count for the means.
    pub sphere_nodes: usize,
    /// Seed for Monte-Carlo sphere rules (n >= 4).
    pub seed: u64,
}

impl Default for RadialSettings {
    fn default() -> Self {
        RadialSettings {
            resolution: 64,
            rel_tol: 1e-8,
            max_nodes: 1 << 18,
            sphere_nodes: 256,
            seed: 0,
        }
    }
}

impl RadialSettings {
    fn validate(&self) -> Result<()> {
        if self.resolution < 32 {
            return Err(Error::invalid(format!(
                "radial resolution must be >= 32, got {}",
                self.resolution
            )));
        }
        Ok(())
    }

    pub fn sphere_rule(&self, dim: usize) -> Result<SphereRule> {
        SphereRule::new(dim, self.sphere_nodes, self.seed)
    }
}

/// Mean of the field over the sphere `{ |x - x0| = t }`.
pub fn spherical_mean(
    field: &dyn Field,
    x0: &[f64],
    t: f64,
    rule: &SphereRule,
) -> Result<ExtendedNonneg> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!("sphere radius must be positive, got {t}")));
    }
    let m = rule.mean(x0, t, |x| Ok(field.eval(x)?.value()))?;
    Ok(ExtendedNonneg::new_unchecked(m))
}

/// Tabulated radial profile `(t, q(t))` on a strictly increasing grid.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    ts: Vec<f64>,
    qs: Vec<ExtendedNonneg>,
}

impl RadialProfile {
    pub fn new(ts: Vec<f64>, qs: Vec<ExtendedNonneg>) -> Result<Self> {
        if ts.len() != qs.len() || ts.is_empty() {
            return Err(Error::invalid("profile grids must be nonempty and equal length"));
        }
        if ts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("profile radii must be strictly increasing"));
        }
        Ok(RadialProfile { ts, qs })
    }

    /// Samples the mean on a log-spaced grid across the ring.
    pub fn sample(
        field: &dyn Field,
        ring: &RingCondenser,
        count: usize,
        set: &RadialSettings,
    ) -> Result<Self> {
        let rule = set.sphere_rule(ring.dim())?;
        let (lo, hi) = (ring.r1().ln(), ring.r2().ln());
        let mut ts = Vec::with_capacity(count);
        let mut qs = Vec::with_capacity(count);
        for i in 0..count {
            let u = lo + (hi - lo) * i as f64 / (count - 1).max(1) as f64;
            let t = u.exp();
            ts.push(t);
            qs.push(spherical_mean(field, ring.center(), t, &rule)?);
        }
        RadialProfile::new(ts, qs)
    }

    pub fn ts(&self) -> &[f64] {
        &self.ts
    }

    pub fn qs(&self) -> &[ExtendedNonneg] {
        &self.qs
    }
}

/// Result of the radial ring integral.
#[derive(Debug, Clone, Copy)]
pub struct RingIntegral {
    pub value: ExtendedNonneg,
    pub converged: bool,
    pub nodes: usize,
}

/// The ring integral `I` over `(r1, r2)` about the ring center.
pub fn ring_integral(
    field: &dyn Field,
    ring: &RingCondenser,
    exps: &Exponents,
    set: &RadialSettings,
) -> Result<ExtendedNonneg> {
    Ok(ring_integral_report(field, ring, exps, set)?.value)
}

pub fn ring_integral_report(
    field: &dyn Field,
    ring: &RingCondenser,
    exps: &Exponents,
    set: &RadialSettings,
) -> Result<RingIntegral> {
    set.validate()?;
    if ring.dim() != field.dim() {
        return Err(Error::invalid("ring and field dimensions differ"));
    }
    let rule = set.sphere_rule(ring.dim())?;
    let rad_exp = exps.radius_exponent();
    let mean_exp = exps.mean_exponent();
    let (u_lo, u_hi) = (ring.r1().ln(), ring.r2().ln());

    // Scan the means on the initial grid to locate zero radii. Two adjacent
    // zeros are read as a zero interval, which makes I infinite by the a/0
    // convention. Isolated zeros are punctured out below (improper limit).
    let scan_n = set.resolution + 1;
    let mut scan_zero = vec![false; scan_n];
    for (i, z) in scan_zero.iter_mut().enumerate() {
        let u = u_lo + (u_hi - u_lo) * i as f64 / (scan_n - 1) as f64;
        let q = spherical_mean(field, ring.center(), u.exp(), &rule)?;
        *z = q.is_zero();
    }
    if scan_zero.windows(2).any(|w| w[0] && w[1]) {
        return Ok(RingIntegral {
            value: ExtendedNonneg::INFINITY,
            converged: true,
            nodes: scan_n,
        });
    }
    let punctures: Vec<f64> = scan_zero
        .iter()
        .enumerate()
        .filter(|(_, z)| **z)
        .map(|(i, _)| u_lo + (u_hi - u_lo) * i as f64 / (scan_n - 1) as f64)
        .collect();

    // Integrate in u = log r: dI = exp(u (1 - rad_exp)) q(e^u)^{-mean_exp} du.
    let mut integrand = |u: f64| -> Result<f64> {
        let q = spherical_mean(field, ring.center(), u.exp(), &rule)?;
        if q.is_infinite() {
            return Ok(0.0);
        }
        if q.is_zero() {
            // unscanned zero: surfaces as divergence in the adaptive pass
            return Ok(f64::INFINITY);
        }
        Ok((u * (1.0 - rad_exp)).exp() * q.value().powf(-mean_exp))
    };

    let gap = (u_hi - u_lo) * 1e-9;
    let mut segments = Vec::new();
    let mut start = u_lo;
    for pu in &punctures {
        let a = (pu - gap).max(start);
        if a > start {
            segments.push((start, a));
        }
        start = pu + gap;
    }
    if start < u_hi {
        segments.push((start, u_hi));
    }

    let quad = AdaptiveSettings {
        rel_tol: set.rel_tol,
        initial_panels: set.resolution.max(32),
        max_nodes: set.max_nodes,
    };
    let mut total = 0.0;
    let mut nodes = scan_n;
    let mut converged = true;
    for (a, b) in segments {
        let est = integrate_adaptive(&mut integrand, a, b, &quad)?;
        nodes += est.nodes;
        if est.diverging {
            return Ok(RingIntegral {
                value: ExtendedNonneg::INFINITY,
                converged: true,
                nodes,
            });
        }
        converged &= est.converged;
        total += est.value;
    }
    Ok(RingIntegral {
        value: ExtendedNonneg::new_unchecked(total),
        converged,
        nodes,
    })
}

/// Closed-form ring integral for Q = 1: `log(r2/r1)` when p = n, otherwise
/// `((p-1)/(n-p)) (r1^{(p-n)/(p-1)} - r2^{(p-n)/(p-1)})`.
pub fn constant_field_ring_integral(r1: f64, r2: f64, exps: &Exponents) -> f64 {
    if exps.is_conformal() {
        (r2 / r1).ln()
    } else {
        let e = (exps.p() - exps.nf()) / (exps.p() - 1.0);
        (exps.p() - 1.0) / (exps.nf() - exps.p()) * (r1.powf(e) - r2.powf(e))
    }
}

/// `omega_{n-1} / I^{p-1}` with the extended conventions
/// (I = inf gives 0, I = 0 gives inf).
pub fn modulus_upper_bound(i: ExtendedNonneg, exps: &Exponents) -> ExtendedNonneg {
    let omega = ExtendedNonneg::new_unchecked(exps.constants().omega);
    let denom = i.powf(exps.p() - 1.0);
    // omega is finite and positive, so inf/inf cannot occur
    ext_div(omega, denom).expect("finite numerator")
}

/// Two-route cross-check of the weighted volume identity
/// `int_A Q psi^p dm = omega_{n-1} I` with
/// `psi(t) = 1 / (t^{(n-1)/(p-1)} q(t)^{1/(p-1)})`.
#[derive(Debug, Clone, Copy)]
pub struct FubiniReport {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct FubiniSettings {
    pub radial: RadialSettings,
    /// Simpson panels for the volume route (even, >= 8).
    pub volume_panels: usize,
    /// Sphere nodes for the volume route (kept distinct from the radial rule).
    pub volume_sphere_nodes: usize,
}

impl Default for FubiniSettings {
    fn default() -> Self {
        FubiniSettings {
            radial: RadialSettings::default(),
            volume_panels: 256,
            volume_sphere_nodes: 384,
        }
    }
}

pub fn fubini_check(
    field: &dyn Field,
    ring: &RingCondenser,
    exps: &Exponents,
    set: &FubiniSettings,
) -> Result<FubiniReport> {
    let i = ring_integral(field, ring, exps, &set.radial)?;
    if !i.is_finite() || i.is_zero() {
        return Err(Error::numerical(format!(
            "volume identity needs 0 < I < inf, got {i}"
        )));
    }
    let omega = exps.constants().omega;
    let rhs = omega * i.value();

    // Volume route: Simpson in radius, independent sphere rule, evaluating
    // the full integrand mean per radius.
    let panels = set.volume_panels.max(8) & !1usize;
    let rule = SphereRule::new(ring.dim(), set.volume_sphere_nodes, set.radial.seed + 1)?;
    let rad_exp = exps.radius_exponent();
    let mean_exp = exps.mean_exponent();
    let nf = exps.nf();
    let p = exps.p();
    let h = (ring.r2() - ring.r1()) / panels as f64;
    let mut lhs = 0.0;
    for node in 0..=panels {
        let r = ring.r1() + h * node as f64;
        let q = spherical_mean(field, ring.center(), r, &rule)?;
        let g = if q.is_zero() || q.is_infinite() {
            0.0
        } else {
            let psi = 1.0 / (r.powf(rad_exp) * q.value().powf(mean_exp));
            let mean_q_psi_p = rule.mean(ring.center(), r, |x| {
                Ok(field.eval(x)?.value() * psi.powf(p))
            })?;
            omega * r.powf(nf - 1.0) * mean_q_psi_p
        };
        let w = if node == 0 || node == panels {
            1.0
        } else if node % 2 == 1 {
            4.0
        } else {
            2.0
        };
        lhs += w * g;
    }
    lhs *= h / 3.0;
    Ok(FubiniReport {
        lhs,
        rhs,
        rel_error: (lhs - rhs).abs() / rhs,
    })
}

/// The admissible radial density scaled to unit integral:
/// `eta1(t) = psi(t) / I` with `int_{r1}^{r2} eta1 = 1`.
pub struct NormalizedEta<'a> {
    field: &'a dyn Field,
    ring: &'a RingCondenser,
    exps: Exponents,
    i_value: f64,
    rule: SphereRule,
}

pub fn normalized_eta<'a>(
    field: &'a dyn Field,
    ring: &'a RingCondenser,
    exps: &Exponents,
    set: &RadialSettings,
) -> Result<NormalizedEta<'a>> {
    let i = ring_integral(field, ring, exps, set)?;
    if i.is_zero() || i.is_infinite() {
        return Err(Error::numerical(format!(
            "normalized density needs 0 < I < inf, got {i}"
        )));
    }
    Ok(NormalizedEta {
        field,
        ring,
        exps: *exps,
        i_value: i.value(),
        rule: set.sphere_rule(ring.dim())?,
    })
}

impl<'a> NormalizedEta<'a> {
    pub fn ring_integral(&self) -> f64 {
        self.i_value
    }

    /// eta1 at radius t inside (r1, r2); zero outside.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if t <= self.ring.r1() || t >= self.ring.r2() {
            return Ok(0.0);
        }
        let q = spherical_mean(self.field, self.ring.center(), t, &self.rule)?;
        if q.is_infinite() {
            return Ok(0.0);
        }
        if q.is_zero() {
            return Ok(f64::INFINITY);
        }
        let psi = 1.0
            / (t.powf(self.exps.radius_exponent()) * q.value().powf(self.exps.mean_exponent()));
        Ok(psi / self.i_value)
    }

    /// Quadrature of eta1 across the ring; the admissibility check expects 1.
    pub fn integral(&self) -> Result<f64> {
        let quad = AdaptiveSettings {
            rel_tol: 1e-10,
            initial_panels: 64,
            max_nodes: 1 << 18,
        };
        // u = log t again so thin-vs-wide rings behave alike
        let est = integrate_adaptive(
            |u| {
                let t = u.exp();
                Ok(self.eval(t)? * t)
            },
            self.ring.r1().ln(),
            self.ring.r2().ln(),
            &quad,
        )?;
        Ok(est.value)
    }
}
