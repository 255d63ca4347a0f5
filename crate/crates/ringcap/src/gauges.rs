//! Orlicz gauges: strictly increasing convex functions with evaluable
//! inverses, plus the divergence diagnostic for the weighted tail integral
//! `int_{delta0}^inf dtau / (tau * inv(tau)^q)`.
//!
//! Catalog variants: `exp` (e^t), `power-exp` (e^{t^beta}, beta >= 1),
//! `power` ((1+t)^alpha, alpha >= 1) and `tabulated` (validated monotone
//! convex samples with piecewise-linear evaluation). Divergence is decided
//! in closed form for catalog gauges; tabulated gauges only get a numeric
//! partial integral, because divergence of an improper integral cannot be
//! decided from finite data.

use crate::error::{Error, Result};
use crate::quad::{integrate_adaptive, AdaptiveSettings};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;

/// Strictly increasing convex gauge on [0, inf).
pub trait Gauge: Send + Sync {
    /// Value at t >= 0; +inf maps to +inf.
    fn eval(&self, t: f64) -> f64;

    /// tau0 = value at 0.
    fn phi_zero(&self) -> f64;

    /// Inverse at `tau >= phi_zero()`, to relative accuracy 1e-10 or better.
    fn inverse(&self, tau: f64) -> Result<f64>;

    /// Inverse at `e^u`; overridden where the composition has a stable
    /// closed form so huge arguments never materialize.
    fn inverse_log(&self, u: f64) -> Result<f64> {
        self.inverse(u.exp())
    }

    /// Closed-form divergence decision for exponent `q > 0`:
    /// `Some(true)` diverges, `Some(false)` converges, `None` unknown.
    fn divergence_closed_form(&self, q: f64) -> Option<bool>;

    fn describe(&self) -> String;
}

/// e^t
pub struct ExpGauge;

impl Gauge for ExpGauge {
    fn eval(&self, t: f64) -> f64 {
        t.exp()
    }

    fn phi_zero(&self) -> f64 {
        1.0
    }

    fn inverse(&self, tau: f64) -> Result<f64> {
        if tau < 1.0 {
            return Err(Error::invalid(format!("exp gauge inverse needs tau >= 1, got {tau}")));
        }
        Ok(tau.ln())
    }

    fn inverse_log(&self, u: f64) -> Result<f64> {
        if u < 0.0 {
            return Err(Error::invalid(format!("exp gauge inverse needs log tau >= 0, got {u}")));
        }
        Ok(u)
    }

    fn divergence_closed_form(&self, q: f64) -> Option<bool> {
        // integrand ~ 1 / (tau (log tau)^q): diverges iff q <= 1
        Some(q <= 1.0)
    }

    fn describe(&self) -> String {
        "exp".into()
    }
}

/// e^{t^beta}, beta >= 1 (convexity fails below 1).
pub struct PowerExpGauge {
    beta: f64,
}

impl PowerExpGauge {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta >= 1.0 && beta.is_finite()) {
            return Err(Error::invalid(format!(
                "power-exp gauge needs beta >= 1 for convexity, got {beta}"
            )));
        }
        Ok(PowerExpGauge { beta })
    }
}

impl Gauge for PowerExpGauge {
    fn eval(&self, t: f64) -> f64 {
        t.powf(self.beta).exp()
    }

    fn phi_zero(&self) -> f64 {
        1.0
    }

    fn inverse(&self, tau: f64) -> Result<f64> {
        if tau < 1.0 {
            return Err(Error::invalid(format!(
                "power-exp gauge inverse needs tau >= 1, got {tau}"
            )));
        }
        Ok(tau.ln().powf(1.0 / self.beta))
    }

    fn inverse_log(&self, u: f64) -> Result<f64> {
        if u < 0.0 {
            return Err(Error::invalid(format!(
                "power-exp gauge inverse needs log tau >= 0, got {u}"
            )));
        }
        Ok(u.powf(1.0 / self.beta))
    }

    fn divergence_closed_form(&self, q: f64) -> Option<bool> {
        // integrand ~ 1 / (tau (log tau)^{q/beta}): diverges iff q <= beta
        Some(q <= self.beta)
    }

    fn describe(&self) -> String {
        format!("power-exp(beta={})", self.beta)
    }
}

/// (1+t)^alpha, alpha >= 1.
pub struct PowerGauge {
    alpha: f64,
}

impl PowerGauge {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha >= 1.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!("power gauge needs alpha >= 1, got {alpha}")));
        }
        Ok(PowerGauge { alpha })
    }
}

impl Gauge for PowerGauge {
    fn eval(&self, t: f64) -> f64 {
        (1.0 + t).powf(self.alpha)
    }

    fn phi_zero(&self) -> f64 {
        1.0
    }

    fn inverse(&self, tau: f64) -> Result<f64> {
        if tau < 1.0 {
            return Err(Error::invalid(format!("power gauge inverse needs tau >= 1, got {tau}")));
        }
        Ok(tau.powf(1.0 / self.alpha) - 1.0)
    }

    fn inverse_log(&self, u: f64) -> Result<f64> {
        if u < 0.0 {
            return Err(Error::invalid(format!("power gauge inverse needs log tau >= 0, got {u}")));
        }
        Ok((u / self.alpha).exp() - 1.0)
    }

    fn divergence_closed_form(&self, q: f64) -> Option<bool> {
        // integrand ~ tau^{-1 - q/alpha}: converges for every q > 0
        Some(!(q > 0.0))
    }

    fn describe(&self) -> String {
        format!("power(alpha={})", self.alpha)
    }
}

/// Piecewise-linear gauge from validated samples `(t_i, tau_i)`.
///
/// Requires `t_0 = 0`, strict monotonicity and discrete convexity
/// (nondecreasing slopes). Evaluation extrapolates beyond the last sample
/// with the final slope, which keeps the gauge increasing and convex.
pub struct TabulatedGauge {
    ts: Vec<f64>,
    taus: Vec<f64>,
}

impl TabulatedGauge {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::invalid("tabulated gauge needs at least 3 samples"));
        }
        if points[0].0 != 0.0 {
            return Err(Error::invalid("tabulated gauge must start at t = 0"));
        }
        let mut prev_slope = f64::NEG_INFINITY;
        for w in points.windows(2) {
            let (t0, y0) = w[0];
            let (t1, y1) = w[1];
            if !(t1 > t0 && y1 > y0) {
                return Err(Error::invalid(
                    "tabulated gauge samples must be strictly increasing in t and tau",
                ));
            }
            let slope = (y1 - y0) / (t1 - t0);
            if slope < prev_slope * (1.0 - 1e-12) {
                return Err(Error::invalid(
                    "tabulated gauge violates discrete convexity (slopes must not decrease)",
                ));
            }
            prev_slope = slope;
        }
        if points.iter().any(|(t, y)| !t.is_finite() || !y.is_finite() || *y < 0.0) {
            return Err(Error::invalid("tabulated gauge samples must be finite and nonnegative"));
        }
        Ok(TabulatedGauge {
            ts: points.iter().map(|p| p.0).collect(),
            taus: points.iter().map(|p| p.1).collect(),
        })
    }

    fn last_slope(&self) -> f64 {
        let k = self.ts.len();
        (self.taus[k - 1] - self.taus[k - 2]) / (self.ts[k - 1] - self.ts[k - 2])
    }
}

impl Gauge for TabulatedGauge {
    fn eval(&self, t: f64) -> f64 {
        if t.is_infinite() {
            return f64::INFINITY;
        }
        let k = self.ts.len();
        if t >= self.ts[k - 1] {
            return self.taus[k - 1] + self.last_slope() * (t - self.ts[k - 1]);
        }
        let i = match self.ts.binary_search_by(|a| a.partial_cmp(&t).unwrap()) {
            Ok(i) => return self.taus[i],
            Err(i) => i - 1,
        };
        let w = (t - self.ts[i]) / (self.ts[i + 1] - self.ts[i]);
        self.taus[i] + w * (self.taus[i + 1] - self.taus[i])
    }

    fn phi_zero(&self) -> f64 {
        self.taus[0]
    }

    fn inverse(&self, tau: f64) -> Result<f64> {
        if tau < self.taus[0] {
            return Err(Error::invalid(format!(
                "tabulated gauge inverse needs tau >= {}, got {tau}",
                self.taus[0]
            )));
        }
        let k = self.taus.len();
        if tau > self.taus[k - 1] {
            return Ok(self.ts[k - 1] + (tau - self.taus[k - 1]) / self.last_slope());
        }
        // monotone bisection over segments, then the exact linear solve
        let (mut lo, mut hi) = (0usize, k - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.taus[mid] <= tau {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let w = (tau - self.taus[lo]) / (self.taus[hi] - self.taus[lo]);
        Ok(self.ts[lo] + w * (self.ts[hi] - self.ts[lo]))
    }

    fn divergence_closed_form(&self, _q: f64) -> Option<bool> {
        None
    }

    fn describe(&self) -> String {
        format!("tabulated({} samples)", self.ts.len())
    }
}

// --- divergence diagnostic ----------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivergenceVerdict {
    DivergesClosedForm,
    ConvergesClosedForm,
    InconclusiveNumeric,
}

impl DivergenceVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            DivergenceVerdict::DivergesClosedForm => "diverges-closed-form",
            DivergenceVerdict::ConvergesClosedForm => "converges-closed-form",
            DivergenceVerdict::InconclusiveNumeric => "inconclusive-numeric",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DivergenceReport {
    pub partial_integral: f64,
    pub verdict: DivergenceVerdict,
    pub horizon: f64,
}

/// Decides `int_{delta0}^inf dtau / (tau inv(tau)^q)` analytically for
/// catalog gauges; otherwise reports the partial integral to `horizon` and
/// an inconclusive verdict.
pub fn divergence_diagnostic(
    gauge: &dyn Gauge,
    q: f64,
    delta0: f64,
    horizon: f64,
) -> Result<DivergenceReport> {
    if !(q > 0.0) {
        return Err(Error::invalid(format!("divergence exponent q must be > 0, got {q}")));
    }
    if !(delta0 > gauge.phi_zero()) {
        return Err(Error::invalid(format!(
            "delta0 must exceed the gauge value at 0 ({}), got {delta0}",
            gauge.phi_zero()
        )));
    }
    if !(horizon > delta0) {
        return Err(Error::invalid("divergence horizon must exceed delta0"));
    }
    let verdict = match gauge.divergence_closed_form(q) {
        Some(true) => DivergenceVerdict::DivergesClosedForm,
        Some(false) => DivergenceVerdict::ConvergesClosedForm,
        None => DivergenceVerdict::InconclusiveNumeric,
    };
    // substituting u = log tau: integrand du / inv(e^u)^q
    let set = AdaptiveSettings {
        rel_tol: 1e-10,
        initial_panels: 16,
        max_nodes: 1 << 18,
    };
    let est = integrate_adaptive(
        |u| {
            let inv = gauge.inverse_log(u)?;
            Ok(if inv > 0.0 { inv.powf(-q) } else { f64::INFINITY })
        },
        delta0.ln(),
        horizon.ln(),
        &set,
    )?;
    Ok(DivergenceReport {
        partial_integral: est.value,
        verdict,
        horizon,
    })
}

// --- registry -----------------------------------------------------------------

pub type GaugeBuilder = fn(&toml::value::Table, &Path) -> Result<Box<dyn Gauge>>;

pub fn registry() -> &'static BTreeMap<&'static str, GaugeBuilder> {
    static REG: OnceLock<BTreeMap<&'static str, GaugeBuilder>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut m = BTreeMap::new();
        m.insert("exp", build_exp as GaugeBuilder);
        m.insert("power-exp", build_power_exp as GaugeBuilder);
        m.insert("power", build_power as GaugeBuilder);
        m.insert("tabulated", build_tabulated as GaugeBuilder);
        m
    })
}

pub fn build_gauge(table: &toml::value::Table, base: &Path) -> Result<Box<dyn Gauge>> {
    let kind = table
        .get("kind")
        .and_then(|v| v.as_str())
        .ok_or_else(|| Error::Config("gauge table needs a string `kind`".into()))?;
    let builder = registry().get(kind).ok_or_else(|| {
        Error::Config(format!(
            "unknown gauge kind `{kind}` (known: {})",
            registry().keys().cloned().collect::<Vec<_>>().join(", ")
        ))
    })?;
    let mut params = table.clone();
    params.remove("kind");
    builder(&params, base)
}

fn from_table<T: serde::de::DeserializeOwned>(params: &toml::value::Table) -> Result<T> {
    toml::Value::Table(params.clone())
        .try_into()
        .map_err(|e| Error::Config(format!("gauge params: {e}")))
}

fn build_exp(params: &toml::value::Table, _base: &Path) -> Result<Box<dyn Gauge>> {
    if !params.is_empty() {
        return Err(Error::Config("exp gauge takes no parameters".into()));
    }
    Ok(Box::new(ExpGauge))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerExpParams {
    beta: f64,
}

fn build_power_exp(params: &toml::value::Table, _base: &Path) -> Result<Box<dyn Gauge>> {
    let p: PowerExpParams = from_table(params)?;
    Ok(Box::new(PowerExpGauge::new(p.beta)?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerParams {
    alpha: f64,
}

fn build_power(params: &toml::value::Table, _base: &Path) -> Result<Box<dyn Gauge>> {
    let p: PowerParams = from_table(params)?;
    Ok(Box::new(PowerGauge::new(p.alpha)?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TabulatedParams {
    points: Vec<(f64, f64)>,
}

fn build_tabulated(params: &toml::value::Table, _base: &Path) -> Result<Box<dyn Gauge>> {
    let p: TabulatedParams = from_table(params)?;
    Ok(Box::new(TabulatedGauge::new(p.points)?))
}
