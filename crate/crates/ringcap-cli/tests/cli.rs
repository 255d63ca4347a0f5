//! End-to-end tests of the binary: exit codes, outputs, determinism.

use std::path::{Path, PathBuf};
use std::process::Command;

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_ringcap")
}

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn run(args: &[&str]) -> std::process::Output {
    Command::new(binary())
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn tasks_listing_is_complete() {
    let out = run(&["tasks"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for task in [
        "mass-check",
        "ring-bound",
        "fubini",
        "orlicz-curve",
        "epsilon-star",
        "capacity-oracle",
        "certificate-thm1",
        "certificate-thm2",
        "soundness-sweep",
    ] {
        assert!(text.contains(task), "missing {task} in: {text}");
    }
}

#[test]
fn validate_accepts_shipped_scenarios() {
    for entry in std::fs::read_dir(scenarios_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().map(|x| x == "toml") != Some(true) {
            continue;
        }
        let out = run(&["validate", path.to_str().unwrap()]);
        assert!(
            out.status.success(),
            "{}: {}",
            path.display(),
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn malformed_geometry_exits_2_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(
        &config,
        r#"
task = "ring-bound"

[exponents]
n = 2
p = 2.0

[geometry]
x0 = [0.0, 0.0]
r1 = 2.0
r2 = 1.0

[field]
kind = "constant"
value = 1.0
[field.support]
kind = "ball"
center = [0.0, 0.0]
radius = 5.0
"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "run",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!out_dir.exists() || std::fs::read_dir(&out_dir).unwrap().next().is_none());
}

#[test]
fn unknown_task_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("odd.toml");
    std::fs::write(&config, "task = \"explode\"\n").unwrap();
    let out = run(&["validate", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3() {
    // a shallow grid starves the diameter certificate of stage-1 radii
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("shallow.toml");
    std::fs::write(
        &config,
        r#"
task = "certificate-thm2"

[exponents]
n = 3
p = 2.5

[geometry]
x0 = [0.0, 0.0, 0.0]
r0 = 0.9

[gauge]
kind = "exp"

[constraint]
m0 = 2.2
b_n = 2.0

[grids]
eps_decades = 4
eps_per_decade = 8
"#,
    )
    .unwrap();
    let out = run(&[
        "run",
        config.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn ring_bound_scenario_reports_two_pi() {
    let dir = tempfile::tempdir().unwrap();
    let config = scenarios_dir().join("ring_bound.toml");
    let out = run(&[
        "run",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("ring_demo_ring_bound.csv")).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert_eq!(header, "r1,r2,n,p,ring_integral,bound");
    let row: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    let bound = row[5];
    assert!(
        (bound - 2.0 * std::f64::consts::PI).abs() < 1e-6,
        "bound {bound}"
    );
    // profile exported alongside
    assert!(dir.path().join("ring_demo_profile.csv").exists());
    // manifest written
    assert!(dir
        .path()
        .join("ring_demo_ring-bound_manifest.txt")
        .exists());
}

#[test]
fn epsilon_star_scenario_inverts_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let config = scenarios_dir().join("epsilon_star.toml");
    let out = run(&[
        "run",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("eps_star_demo_epsilon_star.csv")).unwrap();
    let row = csv.lines().nth(1).unwrap();
    let cells: Vec<&str> = row.split(',').collect();
    assert_eq!(cells[1], "found");
    let r_star: f64 = cells[2].parse().unwrap();
    let exact = (-std::f64::consts::E.powi(2) / 2.0).exp();
    assert!((r_star / exact - 1.0).abs() < 0.05, "r_star {r_star} vs {exact}");
}

#[test]
fn blocked_output_directory_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    // a plain file where the output directory should go
    let blocker = dir.path().join("occupied");
    std::fs::write(&blocker, b"not a directory").unwrap();
    let config = scenarios_dir().join("mass_check.toml");
    let out = run(&[
        "run",
        config.to_str().unwrap(),
        "--out",
        blocker.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn rerun_is_byte_identical_and_mass_matches_closed_form() {
    let config = scenarios_dir().join("mass_check.toml");
    let run_once = || {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&[
            "run",
            config.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(out.status.success());
        std::fs::read(dir.path().join("mass_demo_mass.csv")).unwrap()
    };
    let bytes = run_once();
    assert_eq!(bytes, run_once());
    // the zero field's mass over the unit disk is the weight integral pi/2
    let text = String::from_utf8(bytes).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let integral: f64 = row[0].parse().unwrap();
    assert!((integral - std::f64::consts::PI / 2.0).abs() < 1e-7, "{integral}");
    assert_eq!(row[2], "1"); // satisfied
}

#[test]
fn tolerance_profile_env_is_validated() {
    let config = scenarios_dir().join("mass_check.toml");
    let out = Command::new(binary())
        .args(["validate", config.to_str().unwrap()])
        .env("RINGCAP_TOL_PROFILE", "bogus")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(binary())
        .args(["validate", config.to_str().unwrap()])
        .env("RINGCAP_TOL_PROFILE", "fast")
        .output()
        .unwrap();
    assert!(out.status.success());
}
