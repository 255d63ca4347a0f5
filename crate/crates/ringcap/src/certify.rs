//! Equicontinuity certificates: explicit curves, valid uniformly over every
//! field satisfying the mass constraint.
//!
//! The capacity-decay certificate tabulates `omega_{n-1} / I_min^{p-1}`
//! where `I_min` is the uniform Orlicz lower bound on the ring integral, so
//! it caps the image capacity of the shrinking condenser for every
//! admissible mapping. The diameter certificate (for n-1 < p < n) chains
//! three inequalities: the decay curve caps the image capacity, inverting
//! the volume lower bound turns that into an image-measure bound and
//! selects the radius where the measure drops below 1, and inverting the
//! diameter lower bound on the inner ring turns a second decay curve into
//! an explicit image-diameter bound.

use crate::capacity::mazya_lower_bound;
use crate::dims::Exponents;
use crate::error::{Error, Result};
use crate::extended::ExtendedNonneg;
use crate::fields::ConstantField;
use crate::gauges::{DivergenceVerdict, Gauge};
use crate::geom::Domain;
use crate::mass::{verify_mass_bound, MassReport};
use crate::orlicz::{uniform_ring_lower_bound_detailed, OrliczParams};
use crate::quad::volume::VolumeSettings;
use crate::radial::modulus_upper_bound;

/// Inequality identifiers recorded in certificate provenance.
pub const STEP_ORLICZ_RING_BOUND: &str = "orlicz-ring-integral-bound";
pub const STEP_CAPACITY_UPPER: &str = "capacity-upper-bound";
pub const STEP_MAZYA_VOLUME: &str = "mazya-volume-bound";
pub const STEP_KRUGLIKOV_DIAMETER: &str = "kruglikov-diameter-bound";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateKind {
    CapacityDecay,
    DiameterBound,
}

impl CertificateKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CertificateKind::CapacityDecay => "capacity-decay",
            CertificateKind::DiameterBound => "diameter-bound",
        }
    }
}

/// Inputs echoed into certificate exports.
#[derive(Debug, Clone)]
pub struct CertificateInputs {
    pub gauge: String,
    pub n: u32,
    pub p: f64,
    pub m0: f64,
    pub x0: Vec<f64>,
    pub r0: f64,
    pub b_n: Option<f64>,
    pub tau_floor_t: Option<f64>,
}

/// A tabulated bound curve with its inequality chain.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub inputs: CertificateInputs,
    /// (eps, bound); +inf records "no information at this radius".
    pub curve: Vec<(f64, f64)>,
    pub provenance: Vec<&'static str>,
    /// Diameter certificates: the radius where the image measure bound
    /// drops below 1.
    pub epsilon_one: Option<f64>,
    /// Divergence verdict for the exponent the bound engine uses, 1/(p-1).
    pub divergence_mean_exponent: DivergenceVerdict,
    /// Verdict for the hypothesis exponent 1/(n-1); coincides with the
    /// engine exponent when p = n.
    pub divergence_dimension_exponent: DivergenceVerdict,
}

impl Certificate {
    /// True when every curve point is the no-information marker.
    pub fn is_vacuous(&self) -> bool {
        self.curve.iter().all(|(_, b)| b.is_infinite())
    }
}

/// Log-spaced descending eps grid starting at the regime cap `r0 2^{-1/n}`.
pub fn eps_grid(r0: f64, n: u32, decades: usize, per_decade: usize) -> Result<Vec<f64>> {
    if !(r0 > 0.0) || n < 2 {
        return Err(Error::invalid("eps grid needs r0 > 0 and n >= 2"));
    }
    if decades == 0 || per_decade == 0 {
        return Err(Error::invalid("eps grid needs positive decades and density"));
    }
    let top = r0 * 2f64.powf(-1.0 / f64::from(n));
    let count = decades * per_decade;
    Ok((0..=count)
        .map(|i| top * 10f64.powf(-(i as f64) / per_decade as f64))
        .collect())
}

fn verdict_for(gauge: &dyn Gauge, q: f64) -> DivergenceVerdict {
    match gauge.divergence_closed_form(q) {
        Some(true) => DivergenceVerdict::DivergesClosedForm,
        Some(false) => DivergenceVerdict::ConvergesClosedForm,
        None => DivergenceVerdict::InconclusiveNumeric,
    }
}

fn decay_point(
    gauge: &dyn Gauge,
    params: &OrliczParams,
    eps: f64,
    tau_floor_t: Option<f64>,
) -> Result<f64> {
    if eps > params.regime_max() {
        return Ok(f64::INFINITY);
    }
    let i_min = uniform_ring_lower_bound_detailed(gauge, params, eps, tau_floor_t)?.value;
    Ok(modulus_upper_bound(ExtendedNonneg::new_unchecked(i_min), &params.exps).value())
}

fn inputs_of(gauge: &dyn Gauge, params: &OrliczParams, b_n: Option<f64>, tau_floor_t: Option<f64>) -> CertificateInputs {
    CertificateInputs {
        gauge: gauge.describe(),
        n: params.exps.n(),
        p: params.exps.p(),
        m0: params.budget.value(),
        x0: params.x0.clone(),
        r0: params.r0,
        b_n,
        tau_floor_t,
    }
}

/// Uniform capacity-decay curve for the conformal exponent p = n.
pub fn capacity_decay_certificate(
    gauge: &dyn Gauge,
    params: &OrliczParams,
    grid: &[f64],
    tau_floor_t: Option<f64>,
) -> Result<Certificate> {
    if !params.exps.is_conformal() {
        return Err(Error::invalid(
            "capacity-decay certificate runs at p = n; use the diameter certificate for p < n",
        ));
    }
    validate_grid(grid)?;
    let mut curve = Vec::with_capacity(grid.len());
    for &eps in grid {
        curve.push((eps, decay_point(gauge, params, eps, tau_floor_t)?));
    }
    if curve.iter().all(|(_, b)| b.is_infinite()) {
        return Err(Error::numerical(
            "empty certificate: the bound range is empty on every grid radius",
        ));
    }
    let q = params.exps.mean_exponent();
    Ok(Certificate {
        kind: CertificateKind::CapacityDecay,
        inputs: inputs_of(gauge, params, None, tau_floor_t),
        curve,
        provenance: vec![STEP_ORLICZ_RING_BOUND, STEP_CAPACITY_UPPER],
        epsilon_one: None,
        divergence_mean_exponent: verdict_for(gauge, q),
        divergence_dimension_exponent: verdict_for(gauge, 1.0 / (params.exps.nf() - 1.0)),
    })
}

/// Explicit image-diameter curve for n-1 < p < n.
pub fn diameter_certificate(
    gauge: &dyn Gauge,
    params: &OrliczParams,
    b_n: f64,
    grid: &[f64],
    tau_floor_t: Option<f64>,
) -> Result<Certificate> {
    let exps = &params.exps;
    let (n, p) = (exps.nf(), exps.p());
    if !(p > n - 1.0 && p < n) {
        return Err(Error::invalid(format!(
            "diameter certificate needs n-1 < p < n, got p = {p}, n = {n}"
        )));
    }
    if !(b_n > 0.0) {
        return Err(Error::invalid("diameter certificate needs b_n > 0"));
    }
    validate_grid(grid)?;

    // Stage 1: cap the image measure of the shrinking ball and pick the
    // radius where it drops below 1. Inverting the volume lower bound:
    // m <= (alpha / K)^{n/(n-p)} with K the volume-bound coefficient.
    let k_coeff = mazya_lower_bound(1.0, exps)?;
    let mut eps1 = None;
    let mut alpha1_min = f64::INFINITY;
    for &eps in grid {
        let alpha = decay_point(gauge, params, eps, tau_floor_t)?;
        let alpha1 = if alpha.is_infinite() {
            f64::INFINITY
        } else {
            (alpha / k_coeff).powf(n / (n - p))
        };
        alpha1_min = alpha1_min.min(alpha1);
        if alpha1 <= 1.0 {
            eps1 = Some(eps);
            break;
        }
    }
    let eps1 = eps1.ok_or_else(|| {
        Error::numerical(format!(
            "diameter certificate stage 1 failed: the image measure bound \
             never reached 1 on the grid (minimum attained {alpha1_min:.6e}); \
             extend the grid to smaller radii"
        ))
    })?;

    // Stage 2: rerun the decay bound on the inner ring (eps, eps1) and
    // invert the diameter lower bound with the stage-1 measure cap m(A) <= 1.
    let inner_params = OrliczParams::new(
        *exps,
        params.budget,
        params.x0.clone(),
        eps1,
    )?;
    let mut curve = Vec::with_capacity(grid.len());
    for &eps in grid {
        let alpha3 = if eps >= inner_params.regime_max() {
            f64::INFINITY
        } else {
            let alpha2 = decay_point(gauge, &inner_params, eps, tau_floor_t)?;
            if alpha2.is_infinite() {
                f64::INFINITY
            } else {
                // d <= (alpha2^{n-1} m(A)^{1-n+p} / b_n)^{1/p} with m(A) <= 1
                (alpha2.powf(n - 1.0) / b_n).powf(1.0 / p)
            }
        };
        curve.push((eps, alpha3));
    }
    if curve.iter().all(|(_, b)| b.is_infinite()) {
        return Err(Error::numerical(
            "empty certificate: the inner-ring bound range is empty on every grid radius",
        ));
    }
    Ok(Certificate {
        kind: CertificateKind::DiameterBound,
        inputs: inputs_of(gauge, params, Some(b_n), tau_floor_t),
        curve,
        provenance: vec![
            STEP_ORLICZ_RING_BOUND,
            STEP_CAPACITY_UPPER,
            STEP_MAZYA_VOLUME,
            STEP_KRUGLIKOV_DIAMETER,
        ],
        epsilon_one: Some(eps1),
        divergence_mean_exponent: verdict_for(gauge, exps.mean_exponent()),
        divergence_dimension_exponent: verdict_for(gauge, 1.0 / (n - 1.0)),
    })
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.windows(2).any(|w| w[1] >= w[0]) || grid[grid.len() - 1] <= 0.0 {
        return Err(Error::invalid(
            "certificate grid must be strictly decreasing and positive",
        ));
    }
    Ok(())
}

// --- user-supplied capacity floor table (chordal inversion) -------------------

/// Table `a -> delta(a)`: every continuum of chordal diameter at least `a`
/// has capacity at least `delta(a)` against the avoided set. Supplied by the
/// user; turning the decay curve into a chordal modulus of continuity is
/// only possible with such a floor.
#[derive(Debug, Clone)]
pub struct DeltaTable {
    entries: Vec<(f64, f64)>,
}

impl DeltaTable {
    pub fn new(mut entries: Vec<(f64, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("capacity floor table must be nonempty"));
        }
        entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if entries
            .iter()
            .any(|(a, d)| !(a.is_finite() && d.is_finite() && *a > 0.0 && *d > 0.0))
        {
            return Err(Error::invalid("capacity floor table needs positive finite entries"));
        }
        if entries.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid("capacity floor table radii must be distinct"));
        }
        Ok(DeltaTable { entries })
    }

    /// Smallest tabulated `a` whose floor exceeds the capacity bound.
    pub fn invert(&self, capacity_bound: f64) -> Option<f64> {
        self.entries
            .iter()
            .find(|(_, delta)| *delta > capacity_bound)
            .map(|(a, _)| *a)
    }
}

/// Chordal modulus-of-continuity curve from a decay certificate and a floor
/// table: pairs (eps, a) with +inf where the table gives no information.
pub fn chordal_modulus_from_decay(cert: &Certificate, table: &DeltaTable) -> Vec<(f64, f64)> {
    cert.curve
        .iter()
        .map(|(eps, bound)| {
            let a = if bound.is_infinite() {
                f64::INFINITY
            } else {
                table.invert(*bound).unwrap_or(f64::INFINITY)
            };
            (*eps, a)
        })
        .collect()
}

// --- radial stretch soundness sweep -------------------------------------------

/// The radial stretch `f(x) = x |x|^{alpha-1}` on the unit ball, the concrete
/// admissible map of the soundness sweep.
#[derive(Debug, Clone, Copy)]
pub struct RadialStretch {
    alpha: f64,
}

impl RadialStretch {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!("radial stretch needs alpha > 1, got {alpha}")));
        }
        Ok(RadialStretch { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The smallest constant Q for which the ring inequality at the origin
    /// holds for this map on the unit ball: `alpha^{1-p}`. The image of the
    /// ring family has modulus `omega / I1(r1^alpha, r2^alpha)^{p-1}`, the
    /// extremal admissible density turns the requirement into
    /// `sup (I1(r1,r2)/I1(r1^alpha,r2^alpha))^{p-1}` over rings inside the
    /// ball, and that supremum is attained by thin rings at the boundary.
    pub fn admissible_q_constant(&self, exps: &Exponents) -> f64 {
        self.alpha.powf(1.0 - exps.p())
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let r = crate::geom::norm(x);
        if r == 0.0 {
            return x.to_vec();
        }
        let scale = r.powf(self.alpha - 1.0);
        x.iter().map(|c| c * scale).collect()
    }

    /// Euclidean diameter of the image of the closed ball of radius eps
    /// about the origin: `2 eps^alpha`.
    pub fn image_ball_diameter(&self, eps: f64) -> f64 {
        2.0 * eps.powf(self.alpha)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub alpha: f64,
    pub eps: f64,
    pub certificate_bound: f64,
    pub measured_diameter: f64,
    pub ok: bool,
}

#[derive(Debug)]
pub struct SweepReport {
    pub certificate: Certificate,
    pub rows: Vec<SweepRow>,
    pub violations: usize,
    /// Mass check per stretch exponent (the constant field alpha^{1-p}).
    pub mass: Vec<(f64, MassReport)>,
}

/// Measures image diameters of radial stretches against the diameter
/// certificate. Every stretch must satisfy the mass constraint at the
/// configured budget; the certificate must never be undershot.
pub fn soundness_sweep(
    gauge: &dyn Gauge,
    params: &OrliczParams,
    b_n: f64,
    grid: &[f64],
    alphas: &[f64],
    vset: &VolumeSettings,
) -> Result<SweepReport> {
    if alphas.is_empty() {
        return Err(Error::invalid("soundness sweep needs at least one stretch exponent"));
    }
    if params.x0.iter().any(|c| *c != 0.0) {
        return Err(Error::invalid("soundness sweep is defined about the origin"));
    }
    let n = params.exps.n() as usize;
    let domain = Domain::Ball {
        center: vec![0.0; n],
        radius: 1.0,
    };
    let mut mass = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let stretch = RadialStretch::new(alpha)?;
        let q = stretch.admissible_q_constant(&params.exps);
        let field = ConstantField::new(q, domain.clone())?;
        let report = verify_mass_bound(&field, gauge, &domain, params.budget, vset)?;
        if !report.satisfied {
            return Err(Error::invalid(format!(
                "stretch alpha = {alpha} needs mass {} but the budget is {}",
                report.integral,
                params.budget.value()
            )));
        }
        mass.push((alpha, report));
    }
    let certificate = diameter_certificate(gauge, params, b_n, grid, None)?;
    let mut rows = Vec::with_capacity(alphas.len() * grid.len());
    let mut violations = 0usize;
    for &alpha in alphas {
        let stretch = RadialStretch::new(alpha)?;
        for &(eps, bound) in &certificate.curve {
            let measured = stretch.image_ball_diameter(eps);
            let ok = bound.is_infinite() || measured <= bound;
            if !ok {
                violations += 1;
            }
            rows.push(SweepRow {
                alpha,
                eps,
                certificate_bound: bound,
                measured_diameter: measured,
                ok,
            });
        }
    }
    Ok(SweepReport {
        certificate,
        rows,
        violations,
        mass,
    })
}
