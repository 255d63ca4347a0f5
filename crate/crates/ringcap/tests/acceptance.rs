//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (run with `--nocapture` to see them on success).
//!
//! 1. ring capacity sandwich at resolution 512 with first-order convergence
//! 2. weighted volume identity across field kinds and dimensions
//! 3. volume lower bound equality case against the discrete oracle
//! 4. uniform chain inequality over mass-verified catalog fields
//! 5. closed-form bound oracle and the epsilon-star inversion
//! 6. certificate soundness sweep over radial stretches
//! 7. chordal metric axioms on random extended points
//! 8. byte-identical reruns of every shipped scenario

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ringcap::capacity::{
    calibrate_bn, discrete_p_capacity, mazya_lower_bound, ring_capacity_exact, Condenser,
    SolverSettings,
};
use ringcap::certify::{eps_grid, soundness_sweep};
use ringcap::chordal::{chordal_distance, ExtendedPoint};
use ringcap::dims::{unit_ball_volume, Exponents};
use ringcap::fields::{ConstantField, Field, LogPowerField};
use ringcap::fields::grid::{sample_grid, AxisSpec, GridField};
use ringcap::gauges::ExpGauge;
use ringcap::geom::{Domain, RingCondenser};
use ringcap::mass::{verify_mass_bound, MassBudget};
use ringcap::orlicz::{
    epsilon_star, uniform_ring_lower_bound, EpsilonStarOutcome, EpsilonStarSettings, OrliczParams,
};
use ringcap::quad::volume::VolumeSettings;
use ringcap::radial::{fubini_check, ring_integral, FubiniSettings, RadialSettings};
use ringcap::scenario::{run_scenario_file, RunOptions};
use std::f64::consts::{E, PI};
use std::path::{Path, PathBuf};
use std::time::Instant;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("acceptance {id} ({name}): {tag} - {detail}");
    assert!(pass, "acceptance {id} ({name}) failed: {detail}");
}

fn big_ball(n: usize, radius: f64) -> Domain {
    Domain::Ball {
        center: vec![0.0; n],
        radius,
    }
}

#[test]
fn criterion_1_ring_capacity_sandwich() {
    let exps = Exponents::conformal(2).unwrap();
    let ring = RingCondenser::new(vec![0.0, 0.0], 1.0, E).unwrap();
    let cond = Condenser::from_ring(&ring);
    let exact = ring_capacity_exact(&ring, &exps);

    let solve = |res: usize| {
        let set = SolverSettings {
            resolution: res,
            ..Default::default()
        };
        discrete_p_capacity(&cond, &exps, &set).unwrap()
    };
    let coarse = solve(256);
    let started = Instant::now();
    let fine = solve(512);
    let wall = started.elapsed().as_secs_f64();

    let err_fine = (fine.energy - exact).abs() / exact;
    let err_coarse = (coarse.energy - exact).abs() / exact;
    let within_5pct = err_fine <= 0.05;
    let sandwich = fine.energy >= exact && coarse.energy >= exact;
    let improvement = err_coarse / err_fine;
    let pass = within_5pct && sandwich && improvement >= 1.5 && wall <= 60.0 && fine.converged;
    report(
        1,
        "ring capacity sandwich",
        pass,
        &format!(
            "res 512 energy {:.6} vs exact {:.6} (rel {:.4}), halving improvement {:.2}x, {:.1}s",
            fine.energy, exact, err_fine, improvement, wall
        ),
    );
}

#[test]
fn criterion_2_volume_identity() {
    let started = Instant::now();
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for n in [2usize, 3] {
        let exps = Exponents::conformal(n as u32).unwrap();
        let support = big_ball(n, 50.0);
        let axes: Vec<AxisSpec> = (0..n)
            .map(|_| AxisSpec {
                min: -3.2,
                max: 3.2,
                count: 65,
            })
            .collect();
        let sampled = sample_grid(axes, |x| {
            1.0 + 0.5 * x.iter().map(|c| c * c).sum::<f64>() + 0.25 * x[0]
        })
        .unwrap();
        let fields: Vec<(&str, Box<dyn Field>, RingCondenser)> = vec![
            (
                "constant",
                Box::new(ConstantField::new(1.0, support.clone()).unwrap()),
                RingCondenser::new(vec![0.0; n], 1.0, E).unwrap(),
            ),
            (
                "log-power",
                Box::new(LogPowerField::new(vec![0.0; n], 1.0, support.clone()).unwrap()),
                RingCondenser::new(vec![0.0; n], 0.05, 0.9).unwrap(),
            ),
            (
                "grid",
                Box::new(GridField::new(sampled.clone(), Some(support.clone()), Some(1.0)).unwrap()),
                RingCondenser::new(vec![0.0; n], 1.0, E).unwrap(),
            ),
        ];
        for (name, field, ring) in &fields {
            let r = fubini_check(field.as_ref(), ring, &exps, &FubiniSettings::default()).unwrap();
            worst = worst.max(r.rel_error);
            detail.push_str(&format!("{name}(n={n})={:.1e} ", r.rel_error));
        }
    }
    let wall = started.elapsed().as_secs_f64();
    let pass = worst <= 1e-3 && wall <= 30.0;
    report(
        2,
        "volume identity",
        pass,
        &format!("worst rel {worst:.2e} ({detail}) in {wall:.1}s"),
    );
}

#[test]
fn criterion_3_volume_bound_equality_case() {
    let exps = Exponents::new(3, 2.0).unwrap();
    let omega3 = unit_ball_volume(3);
    let bound = mazya_lower_bound(omega3, &exps).unwrap();
    let exact = 4.0 * PI;
    let equality = (bound - exact).abs() / exact <= 1e-10;

    let cond = Condenser::new(big_ball(3, 4.0), big_ball(3, 1.0)).unwrap();
    let set = SolverSettings {
        resolution: 96,
        ..Default::default()
    };
    let sol = discrete_p_capacity(&cond, &exps, &set).unwrap();
    let oracle_ok = sol.energy > 0.9 * exact;
    report(
        3,
        "volume bound equality case",
        equality && oracle_ok && sol.converged,
        &format!(
            "bound {bound:.12} vs 4pi {exact:.12}; oracle {:.4} > 0.9 * 4pi = {:.4}",
            sol.energy,
            0.9 * exact
        ),
    );
}

#[test]
fn criterion_4_uniform_chain_inequality() {
    let budget = MassBudget::new(100.0).unwrap();
    let vset = VolumeSettings::default();
    let rset = RadialSettings::default();
    let mut combos = 0usize;
    let mut worst_margin = f64::INFINITY;
    for (n, p, eps_list) in [
        (2u32, 2.0f64, [0.03, 0.01]),
        (3, 2.5, [0.05, 0.01]),
    ] {
        let exps = Exponents::new(n, p).unwrap();
        let domain = big_ball(n as usize, 1.0);
        let params =
            OrliczParams::new(exps, budget, vec![0.0; n as usize], 0.9).unwrap();
        let fields: Vec<Box<dyn Field>> = vec![
            Box::new(ConstantField::new(0.5, domain.clone()).unwrap()),
            Box::new(ConstantField::new(1.0, domain.clone()).unwrap()),
            Box::new(ConstantField::new(2.0, domain.clone()).unwrap()),
            Box::new(ConstantField::new(4.0, domain.clone()).unwrap()),
            Box::new(LogPowerField::new(vec![0.0; n as usize], 1.0, domain.clone()).unwrap()),
        ];
        for field in &fields {
            let mass = verify_mass_bound(field.as_ref(), &ExpGauge, &domain, budget, &vset).unwrap();
            assert!(
                mass.satisfied,
                "field {} has mass {} beyond the budget",
                field.describe(),
                mass.integral
            );
            for eps in eps_list {
                let ring = RingCondenser::new(vec![0.0; n as usize], eps, 0.9).unwrap();
                let i = ring_integral(field.as_ref(), &ring, &exps, &rset).unwrap();
                let bound = uniform_ring_lower_bound(&ExpGauge, &params, eps).unwrap();
                let margin = i.value() - bound;
                worst_margin = worst_margin.min(margin);
                combos += 1;
            }
        }
    }
    let pass = combos == 20 && worst_margin >= -1e-6;
    report(
        4,
        "uniform chain inequality",
        pass,
        &format!("{combos} mass-verified (field, eps) combinations, worst I - bound = {worst_margin:.3e}"),
    );
}

#[test]
fn criterion_5_closed_form_oracle_and_inversion() {
    // budget pi/8 pins the lower limit at e, so the bound is
    // (1/2)(log log U - log log e) = (1/2) log(2 log(1/eps))
    let params = OrliczParams::new(
        Exponents::conformal(2).unwrap(),
        MassBudget::new(PI / 8.0).unwrap(),
        vec![0.0, 0.0],
        1.0,
    )
    .unwrap();
    let mut worst = 0.0f64;
    for eps in [0.2, 0.05, 1e-2, 1e-4, 1e-8] {
        let bound = uniform_ring_lower_bound(&ExpGauge, &params, eps).unwrap();
        let exact = 0.5 * (2.0 * (1.0 / eps).ln()).ln();
        worst = worst.max((bound - exact).abs());
    }
    let oracle_ok = worst <= 1e-8;

    let set = EpsilonStarSettings::default();
    let step = 10f64.powf(1.0 / set.points_per_decade as f64);
    let mut inversion_ok = true;
    let mut detail = format!("worst |bound - closed form| = {worst:.2e};");
    for sigma in [0.5f64, 1.0, 2.0] {
        let exact = (-(2.0 * sigma).exp() / 2.0).exp();
        match epsilon_star(&ExpGauge, &params, sigma, &set).unwrap() {
            EpsilonStarOutcome::Found { r_star, .. } => {
                let ratio = r_star / exact;
                let within_step = ratio <= 1.0 + 1e-9 && ratio >= 1.0 / (step * (1.0 + 1e-9));
                inversion_ok &= within_step;
                detail.push_str(&format!(" sigma={sigma}: r*={r_star:.4e} vs {exact:.4e};"));
            }
            other => {
                inversion_ok = false;
                detail.push_str(&format!(" sigma={sigma}: {other:?};"));
            }
        }
    }
    report(
        5,
        "closed-form oracle and inversion",
        oracle_ok && inversion_ok,
        &detail,
    );
}

#[test]
fn criterion_6_certificate_soundness_sweep() {
    let exps = Exponents::new(3, 2.5).unwrap();
    let cal = calibrate_bn(&exps, 48, 0.5).unwrap();
    let params = OrliczParams::new(
        exps,
        MassBudget::new(2.2).unwrap(),
        vec![0.0; 3],
        0.9,
    )
    .unwrap();
    let grid = eps_grid(0.9, 3, 60, 4).unwrap();
    let sweep = soundness_sweep(
        &ExpGauge,
        &params,
        cal.b_n,
        &grid,
        &[1.5, 2.0, 3.0],
        &VolumeSettings::default(),
    )
    .unwrap();
    let finite = sweep
        .certificate
        .curve
        .iter()
        .filter(|(_, b)| b.is_finite())
        .count();
    let pass = sweep.violations == 0 && finite > 0;
    report(
        6,
        "certificate soundness sweep",
        pass,
        &format!(
            "{} rows, {} violations, {finite} informative certificate radii, b_n = {:.3} (calibrated)",
            sweep.rows.len(),
            sweep.violations,
            cal.b_n
        ),
    );
}

#[test]
fn criterion_7_chordal_metric_axioms() {
    let mut rng = ChaCha8Rng::seed_from_u64(20260809);
    let point = |rng: &mut ChaCha8Rng| -> ExtendedPoint {
        if rng.gen_bool(0.1) {
            ExtendedPoint::Infinity
        } else {
            let scale = 10f64.powf(rng.gen_range(-3.0..6.0));
            ExtendedPoint::finite(vec![
                rng.gen_range(-1.0..1.0) * scale,
                rng.gen_range(-1.0..1.0) * scale,
                rng.gen_range(-1.0..1.0) * scale,
            ])
            .unwrap()
        }
    };
    let mut worst_violation = 0.0f64;
    let mut max_distance = 0.0f64;
    for _ in 0..10_000 {
        let (x, y, z) = (point(&mut rng), point(&mut rng), point(&mut rng));
        let xy = chordal_distance(&x, &y);
        let xz = chordal_distance(&x, &z);
        let zy = chordal_distance(&z, &y);
        worst_violation = worst_violation.max(xy - (xz + zy));
        max_distance = max_distance.max(xy.max(xz).max(zy));
        assert_eq!(xy, chordal_distance(&y, &x));
    }
    let pass = worst_violation <= 1e-12 && max_distance <= 1.0;
    report(
        7,
        "chordal metric axioms",
        pass,
        &format!(
            "10^4 triples with infinity: worst triangle excess {worst_violation:.2e}, max distance {max_distance}"
        ),
    );
}

#[test]
fn criterion_8_scenario_determinism() {
    let scenarios_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&scenarios_dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().map(|x| x == "toml").unwrap_or(false))
        .collect();
    files.sort();
    assert!(files.len() >= 9, "expected the full scenario set, found {}", files.len());

    let mut compared_files = 0usize;
    for scenario in &files {
        let run = |tag: &str| {
            let dir = tempfile::tempdir().unwrap();
            let opts = RunOptions {
                out_dir: Some(dir.path().to_path_buf()),
                verbose: false,
            };
            let outcome = run_scenario_file(scenario, &opts).unwrap_or_else(|e| {
                panic!("{} ({tag}): {e}", scenario.display())
            });
            let mut contents = std::collections::BTreeMap::new();
            for out in outcome.outputs {
                let name = out.file_name().unwrap().to_string_lossy().to_string();
                contents.insert(name, std::fs::read(&out).unwrap());
            }
            contents
        };
        let first = run("first");
        let second = run("second");
        assert_eq!(
            first.keys().collect::<Vec<_>>(),
            second.keys().collect::<Vec<_>>(),
            "{}: output sets differ",
            scenario.display()
        );
        for (name, bytes) in &first {
            assert_eq!(
                bytes,
                &second[name],
                "{}: {name} differs between runs",
                scenario.display()
            );
            compared_files += 1;
        }
    }
    report(
        8,
        "scenario determinism",
        true,
        &format!(
            "{} scenarios, {compared_files} data files byte-identical across reruns",
            files.len()
        ),
    );
}
