//! Quadrature plumbing shared by the bound computations.
//!
//! One-dimensional integrals use composite Gauss-Legendre panels whose count
//! doubles until successive estimates agree to a relative tolerance or a node
//! cap is reached; endpoint-singular integrals get an exponential
//! substitution toward the endpoint so divergence shows up as horizon growth
//! instead of silent garbage.

pub mod sobol;
pub mod sphere;
pub mod volume;

use crate::error::Result;
use std::sync::OnceLock;

/// Panel-doubling controls for the composite rule.
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveSettings {
    /// Stop once successive estimates differ by less than this, relatively.
    pub rel_tol: f64,
    /// Panels in the first pass.
    pub initial_panels: usize,
    /// Hard cap on total integrand evaluations.
    pub max_nodes: usize,
}

impl Default for AdaptiveSettings {
    fn default() -> Self {
        AdaptiveSettings {
            rel_tol: 1e-10,
            initial_panels: 8,
            max_nodes: 1 << 18,
        }
    }
}

/// Outcome of an adaptive pass.
#[derive(Debug, Clone, Copy)]
pub struct QuadEstimate {
    pub value: f64,
    /// Relative change between the last two refinements.
    pub rel_change: f64,
    pub converged: bool,
    /// Estimates grew without settling, or the integrand overflowed:
    /// the integral is treated as divergent by callers.
    pub diverging: bool,
    pub nodes: usize,
}

impl QuadEstimate {
    fn diverged() -> Self {
        QuadEstimate {
            value: f64::INFINITY,
            rel_change: f64::INFINITY,
            converged: false,
            diverging: true,
            nodes: 0,
        }
    }
}

const GL_ORDER: usize = 8;

/// Nodes and weights of the k-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(k >= 1);
    let mut nodes = vec![0.0; k];
    let mut weights = vec![0.0; k];
    for i in 0..k.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_k.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(k, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[k - 1 - i] = x;
        weights[i] = w;
        weights[k - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(k: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=k {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let dp = k as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_ORDER))
}

/// Composite GL estimate with `panels` uniform panels on [a, b].
/// Returns None if any evaluation is non-finite (overflow / undefined).
fn composite_pass<F>(f: &mut F, a: f64, b: f64, panels: usize) -> Result<Option<f64>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (nodes, weights) = gl8();
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let mut acc = 0.0;
        for (x, w) in nodes.iter().zip(weights) {
            let v = f(mid + 0.5 * h * x)?;
            if !v.is_finite() {
                return Ok(None);
            }
            acc += w * v;
        }
        total += acc * 0.5 * h;
    }
    Ok(Some(total))
}

/// Adaptive composite integration of `f` over [a, b] by panel doubling.
pub fn integrate_adaptive<F>(mut f: F, a: f64, b: f64, set: &AdaptiveSettings) -> Result<QuadEstimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(QuadEstimate {
            value: 0.0,
            rel_change: 0.0,
            converged: true,
            diverging: false,
            nodes: 0,
        });
    }
    let mut panels = set.initial_panels.max(1);
    let mut nodes_used = 0usize;
    let mut prev: Option<f64> = None;
    let mut growth_streak = 0u32;
    loop {
        nodes_used += panels * GL_ORDER;
        let est = match composite_pass(&mut f, a, b, panels)? {
            Some(v) => v,
            None => return Ok(QuadEstimate::diverged()),
        };
        if let Some(old) = prev {
            let scale = est.abs().max(old.abs()).max(f64::MIN_POSITIVE);
            let rel = (est - old).abs() / scale;
            if rel <= set.rel_tol {
                return Ok(QuadEstimate {
                    value: est,
                    rel_change: rel,
                    converged: true,
                    diverging: false,
                    nodes: nodes_used,
                });
            }
            // Track persistent growth: a string of refinements each enlarging
            // the estimate by > 25% signals a non-integrable singularity.
            if est.abs() > old.abs() * 1.25 {
                growth_streak += 1;
            } else {
                growth_streak = 0;
            }
            if growth_streak >= 4 && est.abs() > 1e12 {
                return Ok(QuadEstimate::diverged());
            }
            if nodes_used * 2 > set.max_nodes {
                return Ok(QuadEstimate {
                    value: est,
                    rel_change: rel,
                    converged: false,
                    diverging: growth_streak >= 4,
                    nodes: nodes_used,
                });
            }
        }
        prev = Some(est);
        panels *= 2;
    }
}

/// Integral of `f` over (0, b] where `f` may be singular at 0.
///
/// The inner part uses the substitution r = b0 * exp(-v) and extends the
/// horizon until the tail contribution settles; linear or growing tails mean
/// the improper integral diverges.
pub fn integrate_improper_at_zero<F>(
    mut f: F,
    b: f64,
    set: &AdaptiveSettings,
) -> Result<QuadEstimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    assert!(b > 0.0);
    let split = b * 1e-2;
    let outer = integrate_adaptive(&mut f, split, b, set)?;
    if outer.diverging {
        return Ok(QuadEstimate::diverged());
    }
    // Inner part in v-space: integral of f(split * e^-v) * split * e^-v dv.
    let mut inner_total = 0.0;
    let mut v_lo = 0.0f64;
    let mut horizon = 8.0f64;
    let mut tail_prev: Option<f64> = None;
    let mut nodes = outer.nodes;
    let mut converged = false;
    while v_lo < 690.0 {
        let v_hi = horizon.min(690.0);
        let tail = integrate_adaptive(
            |v| {
                let r = split * (-v).exp();
                Ok(f(r)? * r)
            },
            v_lo,
            v_hi,
            set,
        )?;
        nodes += tail.nodes;
        if tail.diverging {
            return Ok(QuadEstimate::diverged());
        }
        inner_total += tail.value;
        let scale = inner_total.abs().max(outer.value.abs()).max(f64::MIN_POSITIVE);
        if tail.value.abs() <= set.rel_tol * scale {
            converged = true;
            break;
        }
        if let Some(tp) = tail_prev {
            // Tail segments not shrinking: logarithmic or worse divergence.
            if tail.value.abs() > 0.9 * tp && inner_total.abs() > 1e12 * scale.min(1.0) {
                return Ok(QuadEstimate::diverged());
            }
            if tail.value.abs() > 0.99 * tp && v_lo > 200.0 {
                return Ok(QuadEstimate::diverged());
            }
        }
        tail_prev = Some(tail.value.abs());
        v_lo = v_hi;
        horizon *= 2.0;
    }
    Ok(QuadEstimate {
        value: outer.value + inner_total,
        rel_change: outer.rel_change,
        converged: outer.converged && converged,
        diverging: false,
        nodes,
    })
}
