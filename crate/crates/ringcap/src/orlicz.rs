//! Uniform lower bounds on the ring integral from the Orlicz mass constraint.
//!
//! For every field Q whose weighted gauge mass over D stays below M0, the
//! ring integral over (eps, r0) about x0 is at least
//! `(1/n) int_L^U dtau / (tau inv(tau)^{1/(p-1)})` with
//! `L = 2 beta(x0) M0 e / (Omega_n r0^n)`, `U = phi(0) r0^n / eps^n` and
//! `beta(x0) = (1 + (r0 + |x0|)^2)^n`, valid for `eps <= r0 2^{-1/n}` and
//! `r0 <= 1`. The annulus mean `M*` of `phi(Q)` pivots the argument: it
//! exceeds phi(0) because the gauge increases, and the mass constraint caps
//! it by `2 beta M0 / (Omega_n r0^n)` inside the regime. When a concrete
//! field is at hand the measured `M*` gives the sharper two-sided variant
//! with limits `e M*` and `M* r0^n / eps^n`, reported alongside.
//!
//! All integrals run in u = log tau, so the astronomically large limits that
//! arise for small eps never materialize as floats.

use crate::dims::Exponents;
use crate::error::{Error, Result};
use crate::fields::Field;
use crate::gauges::{DivergenceVerdict, Gauge};
use crate::geom::{norm, Domain};
use crate::mass::MassBudget;
use crate::quad::volume::{integrate_domain, VolumeSettings};
use crate::quad::{integrate_adaptive, AdaptiveSettings};

/// Shared inputs of the Orlicz bound computations.
#[derive(Debug, Clone)]
pub struct OrliczParams {
    pub exps: Exponents,
    pub budget: MassBudget,
    pub x0: Vec<f64>,
    pub r0: f64,
}

impl OrliczParams {
    pub fn new(exps: Exponents, budget: MassBudget, x0: Vec<f64>, r0: f64) -> Result<Self> {
        if x0.len() != exps.n() as usize {
            return Err(Error::invalid(format!(
                "center has dimension {}, exponents say n = {}",
                x0.len(),
                exps.n()
            )));
        }
        if x0.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("center must be finite"));
        }
        if !(r0 > 0.0 && r0 <= 1.0) {
            return Err(Error::invalid(format!(
                "outer radius must satisfy 0 < r0 <= 1, got {r0}"
            )));
        }
        Ok(OrliczParams {
            exps,
            budget,
            x0,
            r0,
        })
    }

    /// `(1 + (r0 + |x0|)^2)^n`, the weight comparison factor on the annulus.
    pub fn beta(&self) -> f64 {
        let b = 1.0 + (self.r0 + norm(&self.x0)).powi(2);
        b.powi(self.exps.n() as i32)
    }

    /// Largest eps the uniform bound covers: `r0 * 2^{-1/n}`.
    pub fn regime_max(&self) -> f64 {
        self.r0 * 2f64.powf(-1.0 / self.exps.nf())
    }

    /// log of the uniform lower integration limit `2 beta M0 e / (Omega r0^n)`.
    pub fn log_lower_limit(&self) -> f64 {
        let n = self.exps.nf();
        (2.0 * self.beta() * self.budget.value()).ln() + 1.0
            - self.exps.constants().big_omega.ln()
            - n * self.r0.ln()
    }
}

/// Volume mean of `phi(Q)` over the annulus `(eps, r0)` about x0, with the
/// quantities the uniform bound hangs on.
#[derive(Debug, Clone, Copy)]
pub struct AnnulusMeanReport {
    /// The measured mean; +inf when the integral diverges.
    pub m_star: f64,
    /// `(1 + (r0 + |x0|)^2)^n`.
    pub beta: f64,
    /// `2 beta M0 / (Omega_n r0^n)`; caps `m_star` inside the valid regime
    /// whenever the mass constraint holds.
    pub m_star_upper: f64,
    /// `eps <= r0 * 2^{-1/n}`.
    pub valid_regime: bool,
    pub converged: bool,
}

pub fn annulus_phi_mean(
    field: &dyn Field,
    gauge: &dyn Gauge,
    params: &OrliczParams,
    eps: f64,
    set: &VolumeSettings,
) -> Result<AnnulusMeanReport> {
    if !(eps > 0.0 && eps < params.r0) {
        return Err(Error::invalid(format!(
            "annulus needs 0 < eps < r0, got eps={eps}, r0={}",
            params.r0
        )));
    }
    let n = params.exps.n() as i32;
    let annulus = Domain::Annulus {
        center: params.x0.clone(),
        r1: eps,
        r2: params.r0,
    };
    let est = integrate_domain(&annulus, set, |x| Ok(gauge.eval(field.eval(x)?.value())))?;
    let volume_norm =
        params.exps.constants().big_omega * (params.r0.powi(n) - eps.powi(n));
    let m_star = if est.diverging {
        f64::INFINITY
    } else {
        est.value / volume_norm
    };
    let beta = params.beta();
    Ok(AnnulusMeanReport {
        m_star,
        beta,
        m_star_upper: 2.0 * beta * params.budget.value()
            / (params.exps.constants().big_omega * params.r0.powi(n)),
        valid_regime: eps <= params.regime_max(),
        converged: est.converged && !est.diverging,
    })
}

/// Detailed output of the uniform lower bound.
#[derive(Debug, Clone, Copy)]
pub struct UniformBound {
    pub value: f64,
    pub log_lower: f64,
    pub log_upper: f64,
    /// The gauge vanished at 0 and a configured floor replaced the
    /// upper-limit coefficient.
    pub used_tau_floor: bool,
}

/// Uniform lower bound on the ring integral over `(eps, r0)`, valid for every
/// field satisfying the mass constraint. Returns 0 when the integration range
/// is empty. Errors when eps leaves the valid regime, when the gauge vanishes
/// at 0 and no floor is configured, or when the budget is so small that no
/// field can satisfy the constraint (the class is empty).
pub fn uniform_ring_lower_bound(gauge: &dyn Gauge, params: &OrliczParams, eps: f64) -> Result<f64> {
    Ok(uniform_ring_lower_bound_detailed(gauge, params, eps, None)?.value)
}

/// As [`uniform_ring_lower_bound`], with an optional substitute argument
/// `tau_floor_t`: when the gauge vanishes at 0, `phi(tau_floor_t)` replaces
/// the upper-limit coefficient (a smaller upper limit only weakens the
/// bound, so the result stays valid).
pub fn uniform_ring_lower_bound_detailed(
    gauge: &dyn Gauge,
    params: &OrliczParams,
    eps: f64,
    tau_floor_t: Option<f64>,
) -> Result<UniformBound> {
    if !(eps > 0.0 && eps <= params.regime_max()) {
        return Err(Error::invalid(format!(
            "eps = {eps} outside the valid regime (0, {}]",
            params.regime_max()
        )));
    }
    let phi0 = gauge.phi_zero();
    let (coeff, used_tau_floor) = if phi0 > 0.0 {
        (phi0, false)
    } else {
        match tau_floor_t {
            Some(t) if t > 0.0 => {
                let v = gauge.eval(t);
                if !(v > 0.0) {
                    return Err(Error::invalid(
                        "tau floor produced a nonpositive gauge value",
                    ));
                }
                (v, true)
            }
            _ => {
                return Err(Error::invalid(
                    "gauge vanishes at 0; configure a tau floor (gauge argument \
                     substituted for 0 in the upper limit) to use the uniform bound",
                ))
            }
        }
    };
    let log_lower = params.log_lower_limit();
    if phi0 > 0.0 && log_lower <= phi0.ln() {
        return Err(Error::invalid(format!(
            "budget M0 = {} makes the mass constraint unsatisfiable for this \
             geometry (lower limit below the gauge value at 0); no field qualifies",
            params.budget.value()
        )));
    }
    let n = params.exps.nf();
    let log_upper = coeff.ln() + n * (params.r0.ln() - eps.ln());
    if log_upper <= log_lower {
        return Ok(UniformBound {
            value: 0.0,
            log_lower,
            log_upper,
            used_tau_floor,
        });
    }
    let value = tail_integral(gauge, params.exps.mean_exponent(), log_lower, log_upper)? / n;
    Ok(UniformBound {
        value,
        log_lower,
        log_upper,
        used_tau_floor,
    })
}

/// Sharper variant from a measured annulus mean: limits `e M*` and
/// `M* r0^n / eps^n`. Returns 0 when the mean is infinite or the range is
/// empty.
pub fn measured_mean_lower_bound(
    gauge: &dyn Gauge,
    exps: &Exponents,
    m_star: f64,
    r0: f64,
    eps: f64,
) -> Result<f64> {
    if !(eps > 0.0 && eps < r0) {
        return Err(Error::invalid("measured-mean bound needs 0 < eps < r0"));
    }
    if !m_star.is_finite() || m_star <= 0.0 {
        return Ok(0.0);
    }
    let log_lower = 1.0 + m_star.ln();
    let phi0 = gauge.phi_zero();
    if phi0 > 0.0 && log_lower <= phi0.ln() {
        // a genuine mean of phi(Q) satisfies e M* > phi(0); anything else
        // carries no information
        return Ok(0.0);
    }
    let log_upper = m_star.ln() + exps.nf() * (r0.ln() - eps.ln());
    if log_upper <= log_lower {
        return Ok(0.0);
    }
    Ok(tail_integral(gauge, exps.mean_exponent(), log_lower, log_upper)? / exps.nf())
}

/// `int du / inv(e^u)^q` over `[log_lower, log_upper]`.
fn tail_integral(gauge: &dyn Gauge, q: f64, log_lower: f64, log_upper: f64) -> Result<f64> {
    let set = AdaptiveSettings {
        rel_tol: 1e-12,
        initial_panels: 32,
        max_nodes: 1 << 18,
    };
    let est = integrate_adaptive(
        |u| {
            let inv = gauge.inverse_log(u)?;
            Ok(if inv > 0.0 { inv.powf(-q) } else { f64::INFINITY })
        },
        log_lower,
        log_upper,
        &set,
    )?;
    if est.diverging {
        return Err(Error::numerical(
            "tail integral diverged on a finite range (gauge inverse vanished)",
        ));
    }
    Ok(est.value)
}

// --- bound curve and the epsilon-star solver ---------------------------------

/// Tabulated uniform bounds on a decreasing eps grid.
#[derive(Debug, Clone)]
pub struct OrliczBoundCurve {
    pub epsilons: Vec<f64>,
    pub lower_bounds: Vec<f64>,
    pub sigma_target: f64,
    /// Largest grid radius below which every tested bound meets the target.
    pub r_star: Option<f64>,
}

/// Evaluates the uniform bound on a strictly decreasing grid. Grid points
/// above the valid regime record the trivial bound 0.
pub fn orlicz_curve(
    gauge: &dyn Gauge,
    params: &OrliczParams,
    grid: &[f64],
    sigma: f64,
    tau_floor_t: Option<f64>,
) -> Result<OrliczBoundCurve> {
    if grid.is_empty() || grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("eps grid must be nonempty and strictly decreasing"));
    }
    if !(sigma > 0.0) {
        return Err(Error::invalid("sigma target must be positive"));
    }
    let regime = params.regime_max();
    let mut bounds = Vec::with_capacity(grid.len());
    for &eps in grid {
        if eps > regime {
            bounds.push(0.0);
        } else {
            bounds.push(uniform_ring_lower_bound_detailed(gauge, params, eps, tau_floor_t)?.value);
        }
    }
    let r_star = grid
        .iter()
        .zip(&bounds)
        .find(|(_, b)| **b >= sigma)
        .map(|(eps, _)| *eps);
    Ok(OrliczBoundCurve {
        epsilons: grid.to_vec(),
        lower_bounds: bounds,
        sigma_target: sigma,
        r_star,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct EpsilonStarSettings {
    /// Grid density of the monotone search.
    pub points_per_decade: usize,
    /// Search floor as a fraction of r0.
    pub floor_factor: f64,
    /// Horizon for the numeric divergence diagnostic report.
    pub divergence_horizon: f64,
}

impl Default for EpsilonStarSettings {
    fn default() -> Self {
        EpsilonStarSettings {
            points_per_decade: 64,
            floor_factor: 1e-12,
            divergence_horizon: 1e6,
        }
    }
}

/// What the solver found.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonStarOutcome {
    /// The largest grid radius whose bound (and every smaller one's, by
    /// monotonicity) reaches sigma.
    Found { r_star: f64, bound: f64 },
    /// The divergence condition fails in closed form, so no radius is
    /// guaranteed to exist.
    ConditionFails { verdict: DivergenceVerdict },
    /// The bound stayed below sigma down to the search floor; a smaller
    /// floor may still succeed when the divergence condition holds.
    NotReachedAboveFloor { floor: f64, best_bound: f64 },
}

/// Monotone search for the radius realizing a target uniform bound.
pub fn epsilon_star(
    gauge: &dyn Gauge,
    params: &OrliczParams,
    sigma: f64,
    set: &EpsilonStarSettings,
) -> Result<EpsilonStarOutcome> {
    if !(sigma > 0.0) {
        return Err(Error::invalid("sigma must be positive"));
    }
    if gauge.divergence_closed_form(params.exps.mean_exponent()) == Some(false) {
        return Ok(EpsilonStarOutcome::ConditionFails {
            verdict: DivergenceVerdict::ConvergesClosedForm,
        });
    }
    let top = params.regime_max();
    let floor = params.r0 * set.floor_factor;
    let decades = (top / floor).log10();
    let count = (decades * set.points_per_decade as f64).ceil() as usize + 1;
    let grid_point = |i: usize| top * 10f64.powf(-(i as f64) / set.points_per_decade as f64);

    let bound_at = |i: usize| -> Result<f64> {
        uniform_ring_lower_bound(gauge, params, grid_point(i))
    };
    // the bound is nondecreasing as eps decreases, so bisect the first index
    // whose bound meets the target
    let last = count - 1;
    if bound_at(last)? < sigma {
        return Ok(EpsilonStarOutcome::NotReachedAboveFloor {
            floor: grid_point(last),
            best_bound: bound_at(last)?,
        });
    }
    if bound_at(0)? >= sigma {
        return Ok(EpsilonStarOutcome::Found {
            r_star: grid_point(0),
            bound: bound_at(0)?,
        });
    }
    let (mut lo, mut hi) = (0usize, last);
    // invariant: bound(lo) < sigma <= bound(hi)
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if bound_at(mid)? >= sigma {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(EpsilonStarOutcome::Found {
        r_star: grid_point(hi),
        bound: bound_at(hi)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::ConstantField;
    use crate::gauges::{ExpGauge, PowerGauge};
    use std::f64::consts::{E, PI};

    fn plane_params(m0: f64) -> OrliczParams {
        OrliczParams::new(
            Exponents::conformal(2).unwrap(),
            MassBudget::new(m0).unwrap(),
            vec![0.0, 0.0],
            1.0,
        )
        .unwrap()
    }

    /// M0 making the uniform lower limit exactly e for the plane setup:
    /// 2 * beta * M0 * e / (Omega * r0^2) = e with beta = 4, Omega = pi.
    fn calibrated_m0() -> f64 {
        PI / 8.0
    }

    #[test]
    fn beta_at_origin_unit_radius() {
        let p = OrliczParams::new(
            Exponents::conformal(3).unwrap(),
            MassBudget::new(1.0).unwrap(),
            vec![0.0, 0.0, 0.0],
            1.0,
        )
        .unwrap();
        assert!((p.beta() - 8.0).abs() < 1e-12); // (1+1)^3
    }

    #[test]
    fn annulus_mean_of_constants() {
        let vset = VolumeSettings::default();
        let params = plane_params(1.0);
        let support = Domain::Ball {
            center: vec![0.0, 0.0],
            radius: 10.0,
        };
        // Q = 0: mean of phi(Q) is phi(0) = 1
        let zero = ConstantField::new(0.0, support.clone()).unwrap();
        let r = annulus_phi_mean(&zero, &ExpGauge, &params, 0.25, &vset).unwrap();
        assert!((r.m_star - 1.0).abs() < 1e-8, "{}", r.m_star);
        assert!(r.valid_regime); // 0.25 < 2^{-1/2}
        // Q = 1: mean is e
        let one = ConstantField::new(1.0, support).unwrap();
        let r = annulus_phi_mean(&one, &ExpGauge, &params, 0.25, &vset).unwrap();
        assert!((r.m_star - E).abs() < 1e-8, "{}", r.m_star);
        assert!(r.m_star >= 1.0); // stays above phi(0)
    }

    #[test]
    fn closed_form_oracle_plane_exp() {
        // limits e and 1/eps^2: bound = (1/2) log(2 log(1/eps))
        let params = plane_params(calibrated_m0());
        for eps in [0.2, 0.05, 1e-3, 1e-6] {
            let b = uniform_ring_lower_bound(&ExpGauge, &params, eps).unwrap();
            let exact = 0.5 * (2.0 * (1.0 / eps).ln()).ln();
            assert!(
                (b - exact).abs() < 1e-9 * exact.max(1.0),
                "eps={eps}: {b} vs {exact}"
            );
        }
    }

    #[test]
    fn empty_range_gives_zero() {
        let params = plane_params(calibrated_m0());
        // upper limit 1/eps^2 = e exactly at eps = e^{-1/2}; a rounding-level
        // sliver of range may survive in floats
        let eps = (-0.5f64).exp();
        let b = uniform_ring_lower_bound(&ExpGauge, &params, eps).unwrap();
        assert!(b.abs() < 1e-12, "{b}");
        // slightly larger eps: range strictly empty, exact zero
        let b = uniform_ring_lower_bound(&ExpGauge, &params, eps * 1.01).unwrap();
        assert_eq!(b, 0.0);
    }

    #[test]
    fn out_of_regime_rejected() {
        let params = plane_params(calibrated_m0());
        assert!(uniform_ring_lower_bound(&ExpGauge, &params, 0.8).is_err());
    }

    #[test]
    fn monotone_in_eps_and_budget() {
        let params = plane_params(calibrated_m0());
        let b1 = uniform_ring_lower_bound(&ExpGauge, &params, 1e-2).unwrap();
        let b2 = uniform_ring_lower_bound(&ExpGauge, &params, 1e-4).unwrap();
        let b3 = uniform_ring_lower_bound(&ExpGauge, &params, 1e-6).unwrap();
        assert!(b1 <= b2 && b2 <= b3);
        assert!(b3 > b1, "strictly increasing once the range is nonempty");

        let bigger_budget = plane_params(2.0 * calibrated_m0());
        let b1_big = uniform_ring_lower_bound(&ExpGauge, &bigger_budget, 1e-2).unwrap();
        assert!(b1_big <= b1);
    }

    #[test]
    fn epsilon_star_inverts_closed_form() {
        let params = plane_params(calibrated_m0());
        let set = EpsilonStarSettings::default();
        let step = 10f64.powf(1.0 / set.points_per_decade as f64);
        for sigma in [0.5f64, 1.0, 2.0] {
            let exact = (-(2.0 * sigma).exp() / 2.0).exp();
            match epsilon_star(&ExpGauge, &params, sigma, &set).unwrap() {
                EpsilonStarOutcome::Found { r_star, bound } => {
                    assert!(bound >= sigma);
                    let ratio = r_star / exact;
                    assert!(
                        ratio <= 1.0000001 && ratio >= 1.0 / (step * 1.0000001),
                        "sigma={sigma}: r_star={r_star} exact={exact}"
                    );
                }
                other => panic!("sigma={sigma}: expected Found, got {other:?}"),
            }
        }
    }

    #[test]
    fn epsilon_star_near_zero_sigma_hits_regime_cap() {
        // Budget in the window where the class is nonempty but the range is
        // already nonempty at the regime cap, so a tiny sigma is met right
        // below r0 2^{-1/n}. The window is (Omega phi(0)/(2 beta e),
        // Omega phi(0)/(beta e)) = (pi/(8e), pi/(4e)).
        let params = plane_params(0.2);
        let set = EpsilonStarSettings::default();
        match epsilon_star(&ExpGauge, &params, 1e-12, &set).unwrap() {
            EpsilonStarOutcome::Found { r_star, .. } => {
                let cap = params.regime_max();
                assert!(r_star <= cap && r_star > cap * 0.97, "r_star={r_star} cap={cap}");
            }
            other => panic!("expected Found, got {other:?}"),
        }
    }

    #[test]
    fn epsilon_star_converging_gauge_fails_precondition() {
        let params = plane_params(calibrated_m0());
        let gauge = PowerGauge::new(2.0).unwrap();
        match epsilon_star(&gauge, &params, 1.0, &EpsilonStarSettings::default()).unwrap() {
            EpsilonStarOutcome::ConditionFails { verdict } => {
                assert_eq!(verdict, DivergenceVerdict::ConvergesClosedForm);
            }
            other => panic!("expected ConditionFails, got {other:?}"),
        }
    }

    #[test]
    fn epsilon_star_floor_report() {
        // sigma far beyond what the floor allows: explicit not-found
        let params = plane_params(calibrated_m0());
        let set = EpsilonStarSettings {
            floor_factor: 1e-3,
            ..Default::default()
        };
        match epsilon_star(&ExpGauge, &params, 50.0, &set).unwrap() {
            EpsilonStarOutcome::NotReachedAboveFloor { floor, best_bound } => {
                assert!(floor >= params.r0 * 1e-3 * 0.9);
                assert!(best_bound < 50.0);
            }
            other => panic!("expected NotReachedAboveFloor, got {other:?}"),
        }
    }

    #[test]
    fn curve_monotone_and_r_star() {
        let params = plane_params(calibrated_m0());
        let grid: Vec<f64> = (0..50).map(|i| 0.5 * 0.7f64.powi(i)).collect();
        let curve = orlicz_curve(&ExpGauge, &params, &grid, 1.0, None).unwrap();
        for w in curve.lower_bounds.windows(2) {
            assert!(w[1] >= w[0], "bounds must not decrease as eps shrinks");
        }
        let r_star = curve.r_star.expect("target reached on this grid");
        for (eps, b) in curve.epsilons.iter().zip(&curve.lower_bounds) {
            if *eps < r_star {
                assert!(*b >= 1.0);
            }
        }
    }

    #[test]
    fn vacuous_budget_rejected() {
        // M0 below the vacuity threshold phi(0) Omega r0^n / (2 beta e)
        let params = plane_params(1e-4);
        let err = uniform_ring_lower_bound(&ExpGauge, &params, 0.1);
        assert!(err.is_err());
    }

    #[test]
    fn tau_floor_for_vanishing_gauge() {
        let gauge = crate::gauges::TabulatedGauge::new(vec![
            (0.0, 0.0),
            (1.0, 1.0),
            (2.0, 3.0),
            (3.0, 6.0),
        ])
        .unwrap();
        let params = plane_params(0.05);
        // without a floor: error
        assert!(uniform_ring_lower_bound(&gauge, &params, 0.1).is_err());
        // with a floor: a finite, possibly zero bound
        let b = uniform_ring_lower_bound_detailed(&gauge, &params, 0.1, Some(1e-6)).unwrap();
        assert!(b.used_tau_floor);
        assert!(b.value.is_finite());
    }

    #[test]
    fn measured_mean_bound_dominates_uniform() {
        // the measured mean is far below its upper cap, so the sharper bound
        // is at least the uniform one
        let vset = VolumeSettings::default();
        let params = plane_params(calibrated_m0());
        let support = Domain::Ball {
            center: vec![0.0, 0.0],
            radius: 10.0,
        };
        let zero = ConstantField::new(0.0, support).unwrap();
        let eps = 1e-3;
        let rep = annulus_phi_mean(&zero, &ExpGauge, &params, eps, &vset).unwrap();
        let sharp =
            measured_mean_lower_bound(&ExpGauge, &params.exps, rep.m_star, params.r0, eps)
                .unwrap();
        let uniform = uniform_ring_lower_bound(&ExpGauge, &params, eps).unwrap();
        assert!(sharp > 0.0);
        assert!(
            sharp >= uniform - 1e-6,
            "sharp {sharp} should dominate uniform {uniform}"
        );
    }
}
