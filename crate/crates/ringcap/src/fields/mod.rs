//! Dilatation fields Q behind a common trait, built by name from config.
//!
//! Catalog variants: `constant`, `radial-power` (clamped `|x-a|^{-s}`),
//! `log-power` (`log(e/|x-a|)^m` inside the unit ball about `a`, 1 outside),
//! and `grid` (sampled values with multilinear interpolation). Every field
//! carries its support domain D and evaluates to 0 outside it.

pub mod grid;

use crate::error::{Error, Result};
use crate::extended::ExtendedNonneg;
use crate::geom::{self, Domain};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;

pub use grid::{GridField, SampledGrid};

/// A nonnegative measurable field on R^n, zero outside its support.
pub trait Field: Send + Sync {
    fn dim(&self) -> usize;

    fn support(&self) -> &Domain;

    /// Value at a finite point; 0 outside the support.
    fn eval(&self, x: &[f64]) -> Result<ExtendedNonneg>;

    /// Human-readable description for manifests.
    fn describe(&self) -> String;
}

/// Constant value on the support.
pub struct ConstantField {
    value: f64,
    support: Domain,
}

impl ConstantField {
    pub fn new(value: f64, support: Domain) -> Result<Self> {
        if !(value >= 0.0) {
            return Err(Error::invalid("constant field value must be >= 0"));
        }
        support.validate()?;
        Ok(ConstantField { value, support })
    }
}

impl Field for ConstantField {
    fn dim(&self) -> usize {
        self.support.dim()
    }

    fn support(&self) -> &Domain {
        &self.support
    }

    fn eval(&self, x: &[f64]) -> Result<ExtendedNonneg> {
        Ok(if self.support.contains(x) {
            ExtendedNonneg::new_unchecked(self.value)
        } else {
            ExtendedNonneg::ZERO
        })
    }

    fn describe(&self) -> String {
        format!("constant(value={}, support={})", self.value, self.support.describe())
    }
}

/// `min(|x-a|^{-s}, cap)` on the support. The clamp keeps evaluations finite
/// at the pole; for integrable exponents the clamped region contributes
/// negligibly at the default cap.
pub struct RadialPowerField {
    center: Vec<f64>,
    s: f64,
    cap: f64,
    support: Domain,
}

impl RadialPowerField {
    pub fn new(center: Vec<f64>, s: f64, cap: f64, support: Domain) -> Result<Self> {
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("radial-power center must be finite"));
        }
        if !(s > 0.0) {
            return Err(Error::invalid("radial-power exponent s must be > 0"));
        }
        if !(cap > 0.0) {
            return Err(Error::invalid("radial-power cap must be > 0"));
        }
        support.validate()?;
        if support.dim() != center.len() {
            return Err(Error::invalid("radial-power center and support dimensions differ"));
        }
        Ok(RadialPowerField {
            center,
            s,
            cap,
            support,
        })
    }
}

impl Field for RadialPowerField {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn support(&self) -> &Domain {
        &self.support
    }

    fn eval(&self, x: &[f64]) -> Result<ExtendedNonneg> {
        if !self.support.contains(x) {
            return Ok(ExtendedNonneg::ZERO);
        }
        let r = geom::dist(x, &self.center);
        let v = if r == 0.0 {
            self.cap
        } else {
            r.powf(-self.s).min(self.cap)
        };
        Ok(ExtendedNonneg::new_unchecked(v))
    }

    fn describe(&self) -> String {
        format!(
            "radial-power(center={:?}, s={}, cap={}, support={})",
            self.center,
            self.s,
            self.cap,
            self.support.describe()
        )
    }
}

/// `log(e/|x-a|)^m` where `|x-a| < 1`, 1 elsewhere on the support.
pub struct LogPowerField {
    center: Vec<f64>,
    m: f64,
    support: Domain,
}

impl LogPowerField {
    pub fn new(center: Vec<f64>, m: f64, support: Domain) -> Result<Self> {
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("log-power center must be finite"));
        }
        if !(m > 0.0) {
            return Err(Error::invalid("log-power exponent m must be > 0"));
        }
        support.validate()?;
        if support.dim() != center.len() {
            return Err(Error::invalid("log-power center and support dimensions differ"));
        }
        Ok(LogPowerField { center, m, support })
    }
}

impl Field for LogPowerField {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn support(&self) -> &Domain {
        &self.support
    }

    fn eval(&self, x: &[f64]) -> Result<ExtendedNonneg> {
        if !self.support.contains(x) {
            return Ok(ExtendedNonneg::ZERO);
        }
        let r = geom::dist(x, &self.center);
        let v = if r >= 1.0 {
            1.0
        } else if r == 0.0 {
            f64::INFINITY
        } else {
            (1.0 - r.ln()).powf(self.m)
        };
        Ok(ExtendedNonneg::new_unchecked(v))
    }

    fn describe(&self) -> String {
        format!(
            "log-power(center={:?}, m={}, support={})",
            self.center,
            self.m,
            self.support.describe()
        )
    }
}

// --- registry ---------------------------------------------------------------

/// Builds a field from its kind-specific parameter table. `base` resolves
/// relative file paths (grid ingestion).
pub type FieldBuilder = fn(&toml::value::Table, &Path) -> Result<Box<dyn Field>>;

/// Field kinds known to the scenario layer, keyed by config name.
pub fn registry() -> &'static BTreeMap<&'static str, FieldBuilder> {
    static REG: OnceLock<BTreeMap<&'static str, FieldBuilder>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut m = BTreeMap::new();
        m.insert("constant", build_constant as FieldBuilder);
        m.insert("radial-power", build_radial_power as FieldBuilder);
        m.insert("log-power", build_log_power as FieldBuilder);
        m.insert("grid", build_grid as FieldBuilder);
        m
    })
}

/// Builds a field from a config table carrying a `kind` key.
pub fn build_field(table: &toml::value::Table, base: &Path) -> Result<Box<dyn Field>> {
    let kind = table
        .get("kind")
        .and_then(|v| v.as_str())
        .ok_or_else(|| Error::Config("field table needs a string `kind`".into()))?;
    let builder = registry().get(kind).ok_or_else(|| {
        Error::Config(format!(
            "unknown field kind `{kind}` (known: {})",
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
        .map_err(|e| Error::Config(format!("field params: {e}")))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantParams {
    value: f64,
    support: Domain,
}

fn build_constant(params: &toml::value::Table, _base: &Path) -> Result<Box<dyn Field>> {
    let p: ConstantParams = from_table(params)?;
    Ok(Box::new(ConstantField::new(p.value, p.support)?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RadialPowerParams {
    center: Vec<f64>,
    s: f64,
    #[serde(default = "default_cap")]
    cap: f64,
    support: Domain,
}

fn default_cap() -> f64 {
    1e12
}

fn build_radial_power(params: &toml::value::Table, _base: &Path) -> Result<Box<dyn Field>> {
    let p: RadialPowerParams = from_table(params)?;
    Ok(Box::new(RadialPowerField::new(p.center, p.s, p.cap, p.support)?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LogPowerParams {
    center: Vec<f64>,
    m: f64,
    support: Domain,
}

fn build_log_power(params: &toml::value::Table, _base: &Path) -> Result<Box<dyn Field>> {
    let p: LogPowerParams = from_table(params)?;
    Ok(Box::new(LogPowerField::new(p.center, p.m, p.support)?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridParams {
    file: String,
    support: Option<Domain>,
    outside: Option<f64>,
}

fn build_grid(params: &toml::value::Table, base: &Path) -> Result<Box<dyn Field>> {
    let p: GridParams = from_table(params)?;
    let path = base.join(&p.file);
    let sampled = SampledGrid::read_file(&path)?;
    Ok(Box::new(GridField::new(sampled, p.support, p.outside)?))
}
