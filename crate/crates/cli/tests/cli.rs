//! End-to-end tests of the `stratgrid` binary: run/scaffold/verify flows,
//! exit-code mapping, and byte-identical output determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_stratgrid")
}

fn case_study() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/case_study.toml")
}

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(bin());
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn stratgrid")
}

#[test]
fn run_both_modes_writes_outputs_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let output = run(
        &["run", "--scenario", case_study().to_str().unwrap(), "--mode", "both", "--out", out.to_str().unwrap()],
        &[],
    );
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("reduction"), "{stdout}");
    for file in ["cooperative.csv", "independent.csv", "report.txt"] {
        assert!(out.join(file).exists(), "missing {file}");
    }
    let report = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("cooperative objective"));
}

#[test]
fn byte_identical_outputs_for_same_scenario_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (out_a, out_b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&out_a, &out_b] {
        let output = run(
            &[
                "run",
                "--scenario",
                case_study().to_str().unwrap(),
                "--mode",
                "both",
                "--out",
                out.to_str().unwrap(),
                "--seed",
                "7",
                "--emit-link-budgets",
            ],
            &[],
        );
        assert!(output.status.success());
    }
    for file in ["cooperative.csv", "independent.csv", "report.txt", "link_budgets.csv"] {
        let a = std::fs::read(out_a.join(file)).unwrap();
        let b = std::fs::read(out_b.join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
        assert!(!a.is_empty());
    }
    println!("ACCEPTANCE 10 output determinism          PASS  byte-identical CSV and report");
}

#[test]
fn scaffold_then_run_produces_expected_peak() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("medium.toml");
    let output = run(&["scaffold", "--class", "medium", "--path", path.to_str().unwrap()], &[]);
    assert!(output.status.success());

    let out = dir.path().join("out");
    let output = run(
        &["run", "--scenario", path.to_str().unwrap(), "--mode", "cooperative", "--out", out.to_str().unwrap()],
        &[],
    );
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let csv = std::fs::read_to_string(out.join("cooperative.csv")).unwrap();
    let peak_gen = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse::<f64>().unwrap())
        .fold(0.0f64, f64::max);
    assert!((peak_gen - 10_000.0).abs() < 150.0, "medium scaffold peak {peak_gen} W");
}

#[test]
fn scaffold_small_stays_in_band() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("small.toml");
    assert!(run(&["scaffold", "--class", "small", "--path", path.to_str().unwrap()], &[]).status.success());
    let out = dir.path().join("out");
    assert!(run(
        &["run", "--scenario", path.to_str().unwrap(), "--mode", "independent", "--out", out.to_str().unwrap()],
        &[]
    )
    .status
    .success());
    let csv = std::fs::read_to_string(out.join("independent.csv")).unwrap();
    let peak_gen = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse::<f64>().unwrap())
        .fold(0.0f64, f64::max);
    assert!((1_100.0..=2_500.0).contains(&peak_gen), "small scaffold peak {peak_gen} W");
}

#[test]
fn scaffold_to_unwritable_path_is_io_error() {
    let output = run(&["scaffold", "--class", "small", "--path", "/nonexistent-dir/x.toml"], &[]);
    assert_eq!(output.status.code(), Some(6), "{}", String::from_utf8_lossy(&output.stderr));
}

#[test]
fn dangling_reference_names_the_missing_id() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.toml");
    let mut text = std::fs::read_to_string(case_study()).unwrap();
    text = text.replace("to = \"hap2\"", "to = \"hap9\"");
    std::fs::write(&path, text).unwrap();
    let output = run(
        &["run", "--scenario", path.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()],
        &[],
    );
    assert_eq!(output.status.code(), Some(4));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("hap9"), "stderr must name the missing id: {stderr}");
}

#[test]
fn malformed_scenario_is_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "not toml = [").unwrap();
    let output = run(
        &["run", "--scenario", path.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()],
        &[],
    );
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn validation_error_carries_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("invalid.toml");
    let text = std::fs::read_to_string(case_study())
        .unwrap()
        .replacen("initial_soc = 0.30", "initial_soc = 0.05", 1);
    std::fs::write(&path, text).unwrap();
    let output = run(
        &["run", "--scenario", path.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()],
        &[],
    );
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("/nodes/0/initial_soc"), "{stderr}");
}

#[test]
fn unknown_flags_are_errors() {
    let output = run(&["run", "--scenario", "x", "--frobnicate"], &[]);
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("--frobnicate"), "{stderr}");
}

#[test]
fn help_lists_documented_flags() {
    let output = run(&["run", "--help"], &[]);
    let stdout = String::from_utf8_lossy(&output.stdout);
    for flag in ["--scenario", "--mode", "--out", "--seed", "--emit-link-budgets"] {
        assert!(stdout.contains(flag), "missing {flag} in help");
    }
}

#[test]
fn verify_passes_and_is_deterministic() {
    let a = run(&["verify", "--seed", "42"], &[]);
    assert!(a.status.success(), "verify failed: {}", String::from_utf8_lossy(&a.stdout));
    let b = run(&["verify", "--seed", "42"], &[]);
    assert_eq!(a.stdout, b.stdout, "verify output must be deterministic");
}

#[test]
fn verify_with_loosened_solver_reports_failures() {
    let output = run(&["verify", "--seed", "42"], &[("STRATGRID_SOLVER_TOL", "1e-2")]);
    assert_eq!(output.status.code(), Some(8));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("FAIL"), "{stdout}");
}

#[test]
fn run_on_null_scenario_reports_zero_objective() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("null.toml");
    std::fs::write(
        &path,
        r#"
format_version = 1
horizon_hours = 4.0
timestep_hours = 1.0

[environment]
latitude_deg = 0.0
day_of_year = 80

[[ground_stations]]
id = "gs1"
position_km = [0.0, 0.0, 0.0]
max_supply_power_w = 1000.0

[[nodes]]
id = "idle"
pv_area_m2 = 1.0
system_efficiency = 0.000001
mass_kg = 1.0
lift_to_drag = 25.0
airspeed_ms = 0.0
position_km = [0.0, 0.0, 20.0]
initial_soc = 0.2

[nodes.storage]
technology = "secondary_battery"
specific_energy_wh_per_kg = 700.0
storage_mass_kg = 1.0
"#,
    )
    .unwrap();
    let out = dir.path().join("o");
    let output = run(
        &["run", "--scenario", path.to_str().unwrap(), "--mode", "cooperative", "--out", out.to_str().unwrap()],
        &[],
    );
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let stdout = String::from_utf8_lossy(&output.stdout);
    let objective: f64 = stdout
        .lines()
        .find(|l| l.contains("cooperative objective"))
        .and_then(|l| l.split(':').nth(1))
        .and_then(|v| v.trim().trim_end_matches(" Wh").trim().parse().ok())
        .unwrap();
    assert!(objective.abs() < 1.0, "objective {objective}");
}
