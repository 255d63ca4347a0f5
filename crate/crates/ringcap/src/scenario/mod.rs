//! Scenario-driven batch execution: a single TOML config selects a task by
//! name and supplies its inputs; outputs are deterministic delimited-text
//! files plus a run manifest.

pub mod tasks;

use crate::dims::Exponents;
use crate::error::{Error, Result};
use crate::fields::Field;
use crate::gauges::Gauge;
use crate::geom::{Domain, RingCondenser};
use crate::mass::MassBudget;
use crate::orlicz::OrliczParams;
use crate::quad::volume::VolumeSettings;
use crate::radial::{FubiniSettings, RadialSettings};
use crate::report::{fmt_num, Manifest};
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Environment variable selecting a tolerance profile: `default`, `strict`
/// (100x tighter) or `fast` (100x looser).
pub const TOLERANCE_PROFILE_ENV: &str = "RINGCAP_TOL_PROFILE";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub task: String,
    #[serde(default)]
    pub seed: u64,
    pub exponents: Option<ExponentsConfig>,
    pub geometry: Option<GeometryConfig>,
    pub field: Option<toml::value::Table>,
    pub gauge: Option<toml::value::Table>,
    pub constraint: Option<ConstraintConfig>,
    /// Mass-check region; defaults to the field support.
    pub domain: Option<Domain>,
    pub condenser: Option<CondenserConfig>,
    pub sweep: Option<SweepConfig>,
    /// Optional capacity floor table for the chordal inversion.
    pub delta_table: Option<Vec<DeltaEntry>>,
    #[serde(default)]
    pub grids: GridsConfig,
    #[serde(default)]
    pub tolerances: TolerancesConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentsConfig {
    pub n: u32,
    pub p: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub x0: Vec<f64>,
    pub r0: Option<f64>,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintConfig {
    pub m0: Option<f64>,
    pub sigma: Option<f64>,
    pub b_n: Option<f64>,
    #[serde(default)]
    pub calibrate_b_n: bool,
    pub calibration_margin: Option<f64>,
    /// Gauge argument substituted for 0 in the bound's upper limit when the
    /// gauge vanishes at 0.
    pub tau_floor_t: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CondenserConfig {
    pub outer: Domain,
    pub inner: Domain,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub alphas: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaEntry {
    pub a: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridsConfig {
    pub eps_decades: usize,
    pub eps_per_decade: usize,
    pub radial_resolution: usize,
    pub sphere_nodes: usize,
    pub volume_panels: usize,
    pub capacity_resolution: usize,
    pub calibration_resolution: usize,
    pub profile_points: usize,
    pub qmc_points: usize,
}

impl Default for GridsConfig {
    fn default() -> Self {
        GridsConfig {
            eps_decades: 6,
            eps_per_decade: 64,
            radial_resolution: 64,
            sphere_nodes: 256,
            volume_panels: 256,
            capacity_resolution: 128,
            calibration_resolution: 48,
            profile_points: 65,
            qmc_points: 1 << 20,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TolerancesConfig {
    pub radial_rel: f64,
    pub quad_rel: f64,
}

impl Default for TolerancesConfig {
    fn default() -> Self {
        TolerancesConfig {
            radial_rel: 1e-8,
            quad_rel: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub prefix: Option<String>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("scenario parse: {e}")))
    }

    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let scenario = Self::parse(&text)?;
        let base = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Ok((scenario, base))
    }
}

/// Per-run context handed to task runners: resolved settings plus typed
/// accessors over the config with task-oriented error messages.
pub struct TaskCtx<'a> {
    pub scenario: &'a Scenario,
    pub base: &'a Path,
    pub out_dir: PathBuf,
    pub prefix: String,
    pub verbose: bool,
    tol_factor: f64,
}

impl<'a> TaskCtx<'a> {
    pub fn out(&self, suffix: &str) -> PathBuf {
        self.out_dir.join(format!("{}_{suffix}", self.prefix))
    }

    pub fn exponents(&self) -> Result<Exponents> {
        let e = self
            .scenario
            .exponents
            .ok_or_else(|| Error::Config("this task needs an [exponents] section".into()))?;
        Exponents::new(e.n, e.p)
    }

    pub fn geometry(&self) -> Result<&GeometryConfig> {
        self.scenario
            .geometry
            .as_ref()
            .ok_or_else(|| Error::Config("this task needs a [geometry] section".into()))
    }

    pub fn ring(&self) -> Result<RingCondenser> {
        let g = self.geometry()?;
        let r1 = g
            .r1
            .ok_or_else(|| Error::Config("this task needs geometry.r1".into()))?;
        let r2 = g
            .r2
            .ok_or_else(|| Error::Config("this task needs geometry.r2".into()))?;
        RingCondenser::new(g.x0.clone(), r1, r2)
    }

    pub fn field(&self) -> Result<Box<dyn Field>> {
        let table = self
            .scenario
            .field
            .as_ref()
            .ok_or_else(|| Error::Config("this task needs a [field] section".into()))?;
        crate::fields::build_field(table, self.base)
    }

    pub fn gauge(&self) -> Result<Box<dyn Gauge>> {
        let table = self
            .scenario
            .gauge
            .as_ref()
            .ok_or_else(|| Error::Config("this task needs a [gauge] section".into()))?;
        crate::gauges::build_gauge(table, self.base)
    }

    pub fn budget(&self) -> Result<MassBudget> {
        let m0 = self
            .scenario
            .constraint
            .and_then(|c| c.m0)
            .ok_or_else(|| Error::Config("this task needs constraint.m0".into()))?;
        MassBudget::new(m0)
    }

    pub fn sigma(&self) -> Result<f64> {
        self.scenario
            .constraint
            .and_then(|c| c.sigma)
            .ok_or_else(|| Error::Config("this task needs constraint.sigma".into()))
    }

    pub fn tau_floor(&self) -> Option<f64> {
        self.scenario.constraint.and_then(|c| c.tau_floor_t)
    }

    pub fn orlicz_params(&self) -> Result<OrliczParams> {
        let g = self.geometry()?;
        let r0 = g
            .r0
            .ok_or_else(|| Error::Config("this task needs geometry.r0".into()))?;
        OrliczParams::new(self.exponents()?, self.budget()?, g.x0.clone(), r0)
    }

    pub fn radial_settings(&self) -> RadialSettings {
        let g = &self.scenario.grids;
        RadialSettings {
            resolution: g.radial_resolution.max(32),
            rel_tol: self.scenario.tolerances.radial_rel * self.tol_factor,
            max_nodes: 1 << 18,
            sphere_nodes: g.sphere_nodes,
            seed: self.scenario.seed,
        }
    }

    pub fn volume_settings(&self) -> VolumeSettings {
        let g = &self.scenario.grids;
        VolumeSettings {
            adaptive: crate::quad::AdaptiveSettings {
                rel_tol: self.scenario.tolerances.quad_rel * self.tol_factor,
                initial_panels: 8,
                max_nodes: 1 << 18,
            },
            sphere_nodes: g.sphere_nodes.max(64),
            seed: self.scenario.seed,
            qmc_points: g.qmc_points,
            box_eval_cap: 1 << 22,
        }
    }

    pub fn fubini_settings(&self) -> FubiniSettings {
        let g = &self.scenario.grids;
        FubiniSettings {
            radial: self.radial_settings(),
            volume_panels: g.volume_panels,
            volume_sphere_nodes: g.sphere_nodes + g.sphere_nodes / 2,
        }
    }

    pub fn eps_grid(&self, r0: f64, n: u32) -> Result<Vec<f64>> {
        crate::certify::eps_grid(
            r0,
            n,
            self.scenario.grids.eps_decades,
            self.scenario.grids.eps_per_decade,
        )
    }

    /// b_n from the config, calibrating against the discrete oracle when
    /// asked. Returns (value, description).
    pub fn b_n(&self, exps: &Exponents) -> Result<(f64, String)> {
        let c = self.scenario.constraint.unwrap_or(ConstraintConfig {
            m0: None,
            sigma: None,
            b_n: None,
            calibrate_b_n: false,
            calibration_margin: None,
            tau_floor_t: None,
        });
        if c.calibrate_b_n {
            let margin = c.calibration_margin.unwrap_or(0.5);
            let cal = crate::capacity::calibrate_bn(
                exps,
                self.scenario.grids.calibration_resolution.max(32),
                margin,
            )?;
            Ok((
                cal.b_n,
                format!("calibrated (raw {}, margin {margin}, {})", fmt_num(cal.raw), cal.reference),
            ))
        } else {
            Ok((c.b_n.unwrap_or(1.0), "configured".into()))
        }
    }
}

fn tolerance_factor() -> Result<f64> {
    match std::env::var(TOLERANCE_PROFILE_ENV) {
        Ok(v) => match v.as_str() {
            "default" | "" => Ok(1.0),
            "strict" => Ok(0.01),
            "fast" => Ok(100.0),
            other => Err(Error::Config(format!(
                "unknown tolerance profile `{other}` in {TOLERANCE_PROFILE_ENV} \
                 (expected default, strict or fast)"
            ))),
        },
        Err(_) => Ok(1.0),
    }
}

/// How a run is launched.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the scenario's output directory.
    pub out_dir: Option<PathBuf>,
    pub verbose: bool,
}

/// Result of a completed run.
#[derive(Debug)]
pub struct RunOutcome {
    pub task: String,
    pub outputs: Vec<PathBuf>,
    pub manifest_path: PathBuf,
}

/// Parses and validates without computing anything.
pub fn validate_scenario(scenario: &Scenario, base: &Path) -> Result<()> {
    let def = tasks::lookup(&scenario.task)?;
    let ctx = make_ctx(scenario, base, &RunOptions::default())?;
    (def.check)(&ctx)
}

pub fn run_scenario_file(path: &Path, opts: &RunOptions) -> Result<RunOutcome> {
    let (scenario, base) = Scenario::load(path)?;
    run_scenario(&scenario, &base, opts)
}

pub fn run_scenario(scenario: &Scenario, base: &Path, opts: &RunOptions) -> Result<RunOutcome> {
    let def = tasks::lookup(&scenario.task)?;
    let ctx = make_ctx(scenario, base, opts)?;
    (def.check)(&ctx)?;
    std::fs::create_dir_all(&ctx.out_dir).map_err(|e| Error::io(&ctx.out_dir, e))?;

    let started = Instant::now();
    let mut manifest = Manifest::new();
    manifest.push("task", &scenario.task);
    manifest.push("version", env!("CARGO_PKG_VERSION"));
    manifest.push("seed", scenario.seed.to_string());
    manifest.push(
        "tolerance_profile",
        std::env::var(TOLERANCE_PROFILE_ENV).unwrap_or_else(|_| "default".into()),
    );
    if let Some(e) = scenario.exponents {
        manifest.push("n", e.n.to_string());
        manifest.push_num("p", e.p);
    }

    let outputs = (def.run)(&ctx, &mut manifest)?;

    for out in &outputs {
        manifest.push("output", out.display().to_string());
    }
    manifest.push_num("wall_time_s", started.elapsed().as_secs_f64());
    let manifest_path = ctx.out(&format!("{}_manifest.txt", scenario.task));
    manifest.write(&manifest_path)?;
    Ok(RunOutcome {
        task: scenario.task.clone(),
        outputs,
        manifest_path,
    })
}

fn make_ctx<'a>(scenario: &'a Scenario, base: &'a Path, opts: &RunOptions) -> Result<TaskCtx<'a>> {
    let out_dir = opts
        .out_dir
        .clone()
        .or_else(|| {
            scenario
                .output
                .dir
                .as_ref()
                .map(|d| if d.is_absolute() { d.clone() } else { base.join(d) })
        })
        .unwrap_or_else(|| base.join("out"));
    let prefix = scenario
        .output
        .prefix
        .clone()
        .unwrap_or_else(|| scenario.task.replace('-', "_"));
    Ok(TaskCtx {
        scenario,
        base,
        out_dir,
        prefix,
        verbose: opts.verbose,
        tol_factor: tolerance_factor()?,
    })
}
