//! Task registry: every runnable computation, keyed by config name.

use super::TaskCtx;
use crate::capacity::{discrete_p_capacity, ring_capacity_exact, Condenser, SolverSettings};
use crate::certify::{
    capacity_decay_certificate, chordal_modulus_from_decay, diameter_certificate, soundness_sweep,
    Certificate, DeltaTable,
};
use crate::error::{Error, Result};
use crate::orlicz::{annulus_phi_mean, epsilon_star, measured_mean_lower_bound, orlicz_curve,
    EpsilonStarOutcome, EpsilonStarSettings};
use crate::radial::{fubini_check, modulus_upper_bound, ring_integral_report, RadialProfile};
use crate::report::{fmt_num, CsvFile, Manifest};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::OnceLock;

pub struct TaskDef {
    pub name: &'static str,
    pub summary: &'static str,
    /// Builds and validates every input the task needs, computing nothing.
    pub check: fn(&TaskCtx) -> Result<()>,
    pub run: fn(&TaskCtx, &mut Manifest) -> Result<Vec<PathBuf>>,
}

pub fn registry() -> &'static BTreeMap<&'static str, TaskDef> {
    static REG: OnceLock<BTreeMap<&'static str, TaskDef>> = OnceLock::new();
    REG.get_or_init(|| {
        let defs = [
            TaskDef {
                name: "mass-check",
                summary: "weighted gauge mass of a field against the budget",
                check: check_mass,
                run: run_mass,
            },
            TaskDef {
                name: "ring-bound",
                summary: "radial profile, ring integral and the modulus/capacity upper bound",
                check: check_ring_bound,
                run: run_ring_bound,
            },
            TaskDef {
                name: "fubini",
                summary: "two-route cross-check of the weighted volume identity",
                check: check_ring_bound,
                run: run_fubini,
            },
            TaskDef {
                name: "orlicz-curve",
                summary: "uniform lower-bound curve over the mass-constrained class",
                check: check_orlicz,
                run: run_orlicz_curve,
            },
            TaskDef {
                name: "epsilon-star",
                summary: "radius below which the uniform bound exceeds sigma",
                check: check_epsilon_star,
                run: run_epsilon_star,
            },
            TaskDef {
                name: "capacity-oracle",
                summary: "discrete p-capacity of a condenser",
                check: check_capacity,
                run: run_capacity,
            },
            TaskDef {
                name: "certificate-thm1",
                summary: "capacity-decay equicontinuity certificate (p = n)",
                check: check_cert1,
                run: run_cert1,
            },
            TaskDef {
                name: "certificate-thm2",
                summary: "image-diameter equicontinuity certificate (n-1 < p < n)",
                check: check_cert2,
                run: run_cert2,
            },
            TaskDef {
                name: "soundness-sweep",
                summary: "radial stretch diameters measured against the certificate",
                check: check_sweep,
                run: run_sweep,
            },
        ];
        defs.into_iter().map(|d| (d.name, d)).collect()
    })
}

pub fn lookup(name: &str) -> Result<&'static TaskDef> {
    registry().get(name).ok_or_else(|| {
        Error::Config(format!(
            "unknown task `{name}` (known: {})",
            registry().keys().cloned().collect::<Vec<_>>().join(", ")
        ))
    })
}

// --- mass-check ---------------------------------------------------------------

fn mass_domain(ctx: &TaskCtx) -> Result<crate::geom::Domain> {
    if let Some(d) = &ctx.scenario.domain {
        d.validate()?;
        return Ok(d.clone());
    }
    Ok(ctx.field()?.support().clone())
}

fn check_mass(ctx: &TaskCtx) -> Result<()> {
    let field = ctx.field()?;
    let _ = ctx.gauge()?;
    let _ = ctx.budget()?;
    let domain = mass_domain(ctx)?;
    if domain.dim() != field.dim() {
        return Err(Error::Config("mass domain and field dimensions differ".into()));
    }
    Ok(())
}

fn run_mass(ctx: &TaskCtx, manifest: &mut Manifest) -> Result<Vec<PathBuf>> {
    let field = ctx.field()?;
    let gauge = ctx.gauge()?;
    let budget = ctx.budget()?;
    let domain = mass_domain(ctx)?;
    let report =
        crate::mass::verify_mass_bound(field.as_ref(), gauge.as_ref(), &domain, budget, &ctx.volume_settings())?;
    manifest.push("field", field.describe());
    manifest.push("gauge", gauge.describe());
    manifest.push("domain", domain.describe());
    manifest.push_num("integral", report.integral);
    manifest.push("satisfied", report.satisfied.to_string());
    let mut csv = CsvFile::new(&["integral", "m0", "satisfied", "converged"]);
    csv.row(&[
        report.integral,
        budget.value(),
        report.satisfied as u8 as f64,
        report.converged as u8 as f64,
    ]);
    let path = ctx.out("mass.csv");
    csv.write(&path)?;
    Ok(vec![path])
}

// --- ring-bound / fubini --------------------------------------------------------

fn check_ring_bound(ctx: &TaskCtx) -> Result<()> {
    let field = ctx.field()?;
    let ring = ctx.ring()?;
    let _ = ctx.exponents()?;
    if ring.dim() != field.dim() {
        return Err(Error::Config("ring and field dimensions differ".into()));
    }
    Ok(())
}

fn run_ring_bound(ctx: &TaskCtx, manifest: &mut Manifest) -> Result<Vec<PathBuf>> {
    let field = ctx.field()?;
    let ring = ctx.ring()?;
    let exps = ctx.exponents()?;
    let set = ctx.radial_settings();

    let profile = RadialProfile::sample(
        field.as_ref(),
        &ring,
        ctx.scenario.grids.profile_points.max(2),
        &set,
    )?;
    let report = ring_integral_report(field.as_ref(), &ring, &exps, &set)?;
    let bound = modulus_upper_bound(report.value, &exps);

    manifest.push("field", field.describe());
    manifest.push_num("ring_integral", report.value.value());
    manifest.push_num("bound", bound.value());
    manifest.push("radial_converged", report.converged.to_string());

    let mut csv = CsvFile::new(&["r1", "r2", "n", "p", "ring_integral", "bound"]);
    csv.row(&[
        ring.r1(),
        ring.r2(),
        exps.nf(),
        exps.p(),
        report.value.value(),
        bound.value(),
    ]);
    let bound_path = ctx.out("ring_bound.csv");
    csv.write(&bound_path)?;

    let mut prof = CsvFile::new(&["t", "q"]);
    for (t, q) in profile.ts().iter().zip(profile.qs()) {
        prof.row(&[*t, q.value()]);
    }
    let prof_path = ctx.out("profile.csv");
    prof.write(&prof_path)?;
    Ok(vec![bound_path, prof_path])
}

fn run_fubini(ctx: &TaskCtx, manifest: &mut Manifest) -> Result<Vec<PathBuf>> {
    let field = ctx.field()?;
    let ring = ctx.ring()?;
    let exps = ctx.exponents()?;
    let report = fubini_check(field.as_ref(), &ring, &exps, &ctx.fubini_settings())?;
    manifest.push("field", field.describe());
    manifest.push_num("lhs", report.lhs);
    manifest.push_num("rhs", report.rhs);
    manifest.push_num("rel_error", report.rel_error);
    let mut csv = CsvFile::new(&["lhs", "rhs", "rel_error"]);
    csv.row(&[report.lhs, report.rhs, report.rel_error]);
    let path = ctx.out("fubini.csv");
    csv.write(&path)?;
    Ok(vec![path])
}

// --- orlicz curve / epsilon-star ------------------------------------------------

fn check_orlicz(ctx: &TaskCtx) -> Result<()> {
    let _ = ctx.gauge()?;
    let _ = ctx.orlicz_params()?;
    let _ = ctx.sigma()?;
    Ok(())
}

fn run_orlicz_curve(ctx: &TaskCtx, manifest: &mut Manifest) -> Result<Vec<PathBuf>> {
    let gauge = ctx.gauge()?;
    let params = ctx.orlicz_params()?;
    let sigma = ctx.sigma()?;
    let grid = ctx.eps_grid(params.r0, params.exps.n())?;
    let curve = orlicz_curve(gauge.as_ref(), &params, &grid, sigma, ctx.tau_floor())?;

    manifest.push("gauge", gauge.describe());
    manifest.push_num("m0", params.budget.value());
    manifest.push_num("sigma", sigma);
    match curve.r_star {
        Some(r) => manifest.push_num("r_star", r),
        None => manifest.push("r_star", "not-reached"),
    }

    let mut csv = CsvFile::new(&["epsilon", "lower_bound", "sigma_met"]);
    for (eps, b) in curve.epsilons.iter().zip(&curve.lower_bounds) {
        csv.row(&[*eps, *b, (*b >= sigma) as u8 as f64]);
    }
    let curve_path = ctx.out("orlicz_curve.csv");
    csv.write(&curve_path)?;
    let mut outputs = vec![curve_path];

    // With a concrete field, report the sharper measured-mean bound on a
    // thinned grid (each annulus mean is a volume integral).
    if ctx.scenario.field.is_some() {
        let field = ctx.field()?;
        let vset = ctx.volume_settings();
        let stride = (grid.len() / 32).max(1);
        let mut sharp = CsvFile::new(&["epsilon", "measured_mean_bound", "m_star"]);
        for eps in grid.iter().step_by(stride) {
            let mean = annulus_phi_mean(field.as_ref(), gauge.as_ref(), &params, *eps, &vset)?;
            let bound = measured_mean_lower_bound(
                gauge.as_ref(),
                &params.exps,
                mean.m_star,
                params.r0,
                *eps,
            )?;
            sharp.row(&[*eps, bound, mean.m_star]);
        }
        let sharp_path = ctx.out("orlicz_sharp.csv");
        sharp.write(&sharp_path)?;
        outputs.push(sharp_path);
    }
    Ok(outputs)
}

fn check_epsilon_star(ctx: &TaskCtx) -> Result<()> {
    let _ = ctx.gauge()?;
    let _ = ctx.orlicz_params()?;
    let _ = ctx.sigma()?;
    Ok(())
}

fn run_epsilon_star(ctx: &TaskCtx, manifest: &mut Manifest) -> Result<Vec<PathBuf>> {
    let gauge = ctx.gauge()?;
    let params = ctx.orlicz_params()?;
    let sigma = ctx.sigma()?;
    let set = EpsilonStarSettings {
        points_per_decade: ctx.scenario.grids.eps_per_decade,
        ..Default::default()
    };
    let outcome = epsilon_star(gauge.as_ref(), &params, sigma, &set)?;
    let mut csv = CsvFile::new(&["sigma", "outcome", "r_star", "bound"]);
    let (label, r_star, bound) = match outcome {
        EpsilonStarOutcome::Found { r_star, bound } => ("found", r_star, bound),
        EpsilonStarOutcome::ConditionFails { verdict } => {
            manifest.push("divergence", verdict.as_str());
            ("divergence-condition-fails", f64::NAN, f64::NAN)
        }
        EpsilonStarOutcome::NotReachedAboveFloor { floor, best_bound } => {
            ("not-reached-above-floor", floor, best_bound)
        }
    };
    manifest.push("outcome", label);
    csv.row_raw(&[
        fmt_num(sigma),
        label.to_string(),
        fmt_num(r_star),
        fmt_num(bound),
    ]);
    let path = ctx.out("epsilon_star.csv");
    csv.write(&path)?;
    Ok(vec![path])
}

// --- capacity oracle -------------------------------------------------------------

fn condenser_of(ctx: &TaskCtx) -> Result<Condenser> {
    if let Some(c) = &ctx.scenario.condenser {
        return Condenser::new(c.outer.clone(), c.inner.clone());
    }
    // fall back to the ring geometry
    Ok(Condenser::from_ring(&ctx.ring()?))
}

fn check_capacity(ctx: &TaskCtx) -> Result<()> {
    let _ = condenser_of(ctx)?;
    let _ = ctx.exponents()?;
    Ok(())
}

fn run_capacity(ctx: &TaskCtx, manifest: &mut Manifest) -> Result<Vec<PathBuf>> {
    let cond = condenser_of(ctx)?;
    let exps = ctx.exponents()?;
    let set = SolverSettings {
        resolution: ctx.scenario.grids.capacity_resolution,
        ..Default::default()
    };
    let sol = discrete_p_capacity(&cond, &exps, &set)?;

    manifest.push(
        "capacity_summary",
        format!(
            "outer={} inner={} p={} n={} resolution={} energy={} residual={} wall_s={}",
            cond.outer().describe(),
            cond.inner().describe(),
            fmt_num(exps.p()),
            exps.n(),
            set.resolution,
            fmt_num(sol.energy),
            fmt_num(sol.residual),
            fmt_num(sol.wall_seconds)
        ),
    );

    let mut csv = CsvFile::new(&[
        "n",
        "p",
        "resolution",
        "energy",
        "residual",
        "iterations",
        "converged",
        "exact_if_ring",
    ]);
    let exact = match (&cond.outer(), &cond.inner()) {
        (crate::geom::Domain::Ball { center: ca, radius: ra },
         crate::geom::Domain::Ball { center: cc, radius: rc })
            if ca == cc =>
        {
            ring_capacity_exact(
                &crate::geom::RingCondenser::new(ca.clone(), *rc, *ra)?,
                &exps,
            )
        }
        _ => f64::NAN,
    };
    csv.row(&[
        exps.nf(),
        exps.p(),
        set.resolution as f64,
        sol.energy,
        sol.residual,
        sol.iterations as f64,
        sol.converged as u8 as f64,
        exact,
    ]);
    let summary_path = ctx.out("capacity.csv");
    csv.write(&summary_path)?;

    let grid = sol.to_grid()?;
    let mut buf = Vec::new();
    grid.write_text(&mut buf)
        .map_err(|e| Error::io(ctx.out("potential.grid"), e))?;
    let potential_path = ctx.out("potential.grid");
    crate::report::atomic_write(&potential_path, &buf)?;

    if !sol.converged {
        return Err(Error::numerical(format!(
            "capacity solve did not converge within {} iterations (residual {})",
            sol.iterations, sol.residual
        )));
    }
    Ok(vec![summary_path, potential_path])
}

// --- certificates ------------------------------------------------------------------

fn check_cert1(ctx: &TaskCtx) -> Result<()> {
    let _ = ctx.gauge()?;
    let params = ctx.orlicz_params()?;
    if !params.exps.is_conformal() {
        return Err(Error::Config(
            "certificate-thm1 needs p = n; use certificate-thm2 for p < n".into(),
        ));
    }
    if let Some(entries) = &ctx.scenario.delta_table {
        DeltaTable::new(entries.iter().map(|e| (e.a, e.delta)).collect())?;
    }
    Ok(())
}

fn write_certificate(
    ctx: &TaskCtx,
    cert: &Certificate,
    value_column: &str,
    stem: &str,
    extra: Option<(&str, Vec<f64>)>,
) -> Result<Vec<PathBuf>> {
    let mut comments: Vec<(String, String)> = vec![
        ("kind".into(), cert.kind.as_str().into()),
        ("gauge".into(), cert.inputs.gauge.clone()),
        ("n".into(), cert.inputs.n.to_string()),
        ("p".into(), fmt_num(cert.inputs.p)),
        ("m0".into(), fmt_num(cert.inputs.m0)),
        (
            "x0".into(),
            cert.inputs
                .x0
                .iter()
                .map(|c| fmt_num(*c))
                .collect::<Vec<_>>()
                .join(" "),
        ),
        ("r0".into(), fmt_num(cert.inputs.r0)),
        ("provenance".into(), cert.provenance.join(" -> ")),
        (
            "divergence_mean_exponent".into(),
            cert.divergence_mean_exponent.as_str().into(),
        ),
        (
            "divergence_dimension_exponent".into(),
            cert.divergence_dimension_exponent.as_str().into(),
        ),
    ];
    if let Some(b_n) = cert.inputs.b_n {
        comments.push(("b_n".into(), fmt_num(b_n)));
    }
    if let Some(e1) = cert.epsilon_one {
        comments.push(("epsilon_one".into(), fmt_num(e1)));
    }

    let mut header = vec!["epsilon", value_column];
    if let Some((name, _)) = &extra {
        header.push(name);
    }
    let mut csv = CsvFile::with_comments(&comments, &header);
    for (i, (eps, bound)) in cert.curve.iter().enumerate() {
        match &extra {
            Some((_, col)) => csv.row(&[*eps, *bound, col[i]]),
            None => csv.row(&[*eps, *bound]),
        }
    }
    let curve_path = ctx.out(&format!("{stem}_certificate.csv"));
    csv.write(&curve_path)?;

    let mut summary = Manifest::new();
    for (k, v) in &comments {
        summary.push(k.clone(), v.clone());
    }
    summary.push("grid_points", cert.curve.len().to_string());
    summary.push("vacuous", cert.is_vacuous().to_string());
    let summary_path = ctx.out(&format!("{stem}_summary.txt"));
    summary.write(&summary_path)?;
    Ok(vec![curve_path, summary_path])
}

fn run_cert1(ctx: &TaskCtx, manifest: &mut Manifest) -> Result<Vec<PathBuf>> {
    let gauge = ctx.gauge()?;
    let params = ctx.orlicz_params()?;
    let grid = ctx.eps_grid(params.r0, params.exps.n())?;
    let cert = capacity_decay_certificate(gauge.as_ref(), &params, &grid, ctx.tau_floor())?;
    manifest.push("gauge", gauge.describe());
    manifest.push("divergence", cert.divergence_mean_exponent.as_str());
    if ctx.verbose
        && cert.divergence_mean_exponent
            != crate::gauges::DivergenceVerdict::DivergesClosedForm
    {
        eprintln!(
            "note: divergence condition not established in closed form; \
             the certificate is conditional"
        );
    }
    let extra = match &ctx.scenario.delta_table {
        Some(entries) => {
            let table = DeltaTable::new(entries.iter().map(|e| (e.a, e.delta)).collect())?;
            let chordal = chordal_modulus_from_decay(&cert, &table);
            Some(("chordal_bound", chordal.into_iter().map(|(_, a)| a).collect()))
        }
        None => None,
    };
    write_certificate(ctx, &cert, "capacity_bound", "thm1", extra)
}

fn check_cert2(ctx: &TaskCtx) -> Result<()> {
    let _ = ctx.gauge()?;
    let params = ctx.orlicz_params()?;
    let (n, p) = (params.exps.nf(), params.exps.p());
    if !(p > n - 1.0 && p < n) {
        return Err(Error::Config(format!(
            "certificate-thm2 needs n-1 < p < n, got p = {p}, n = {n}"
        )));
    }
    Ok(())
}

fn run_cert2(ctx: &TaskCtx, manifest: &mut Manifest) -> Result<Vec<PathBuf>> {
    let gauge = ctx.gauge()?;
    let params = ctx.orlicz_params()?;
    let (b_n, b_n_source) = ctx.b_n(&params.exps)?;
    let grid = ctx.eps_grid(params.r0, params.exps.n())?;
    let cert = diameter_certificate(gauge.as_ref(), &params, b_n, &grid, ctx.tau_floor())?;
    manifest.push("gauge", gauge.describe());
    manifest.push_num("b_n", b_n);
    manifest.push("b_n_source", b_n_source);
    if let Some(e1) = cert.epsilon_one {
        manifest.push_num("epsilon_one", e1);
    }
    write_certificate(ctx, &cert, "diameter_bound", "thm2", None)
}

// --- soundness sweep -----------------------------------------------------------------

fn check_sweep(ctx: &TaskCtx) -> Result<()> {
    let _ = ctx.gauge()?;
    let params = ctx.orlicz_params()?;
    let (n, p) = (params.exps.nf(), params.exps.p());
    if !(p > n - 1.0 && p < n) {
        return Err(Error::Config(format!(
            "soundness-sweep needs n-1 < p < n, got p = {p}, n = {n}"
        )));
    }
    let sweep = ctx
        .scenario
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("soundness-sweep needs a [sweep] section with alphas".into()))?;
    if sweep.alphas.is_empty() || sweep.alphas.iter().any(|a| !(*a > 1.0)) {
        return Err(Error::Config("sweep.alphas must all exceed 1".into()));
    }
    Ok(())
}

fn run_sweep(ctx: &TaskCtx, manifest: &mut Manifest) -> Result<Vec<PathBuf>> {
    let gauge = ctx.gauge()?;
    let params = ctx.orlicz_params()?;
    let (b_n, b_n_source) = ctx.b_n(&params.exps)?;
    let grid = ctx.eps_grid(params.r0, params.exps.n())?;
    let alphas = ctx.scenario.sweep.as_ref().expect("checked").alphas.clone();
    let report = soundness_sweep(
        gauge.as_ref(),
        &params,
        b_n,
        &grid,
        &alphas,
        &ctx.volume_settings(),
    )?;

    manifest.push("gauge", gauge.describe());
    manifest.push_num("b_n", b_n);
    manifest.push("b_n_source", b_n_source);
    manifest.push("violations", report.violations.to_string());
    for (alpha, mass) in &report.mass {
        manifest.push(
            format!("mass_alpha_{alpha}"),
            format!("{} (satisfied {})", fmt_num(mass.integral), mass.satisfied),
        );
    }

    let mut csv = CsvFile::new(&[
        "alpha",
        "epsilon",
        "certificate_bound",
        "measured_diameter",
        "ok",
    ]);
    for row in &report.rows {
        csv.row(&[
            row.alpha,
            row.eps,
            row.certificate_bound,
            row.measured_diameter,
            row.ok as u8 as f64,
        ]);
    }
    let sweep_path = ctx.out("sweep.csv");
    csv.write(&sweep_path)?;

    let mut outputs = write_certificate(ctx, &report.certificate, "diameter_bound", "thm2", None)?;
    outputs.insert(0, sweep_path);

    if report.violations > 0 {
        return Err(Error::numerical(format!(
            "soundness sweep found {} certificate violations",
            report.violations
        )));
    }
    Ok(outputs)
}
