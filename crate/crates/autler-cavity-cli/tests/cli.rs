//! End-to-end tests of the binary: flag parsing, exit codes, file outputs.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_autler-cavity"))
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr is UTF-8")
}

/// Flags for the symmetric test point g = 10, kappa = 100, omega21 = 100,
/// N = 10 used throughout the figure presets.
const FIG1_FLAGS: [&str; 10] = [
    "--g1-re",
    "10",
    "--g2-re",
    "10",
    "--kappa",
    "100",
    "--omega21",
    "100",
    "--n-thermal",
    "10",
];

#[test]
fn steady_state_prints_thermal_populations() {
    let output = bin()
        .arg("steady-state")
        .args(FIG1_FLAGS)
        .args(["--eta", "0"])
        .output()
        .expect("binary runs");
    assert!(output.status.success(), "stderr: {}", stderr_of(&output));
    let stdout = stdout_of(&output);
    // p1 = p2 = x / (1 + 2x) with x = N / (N + 1) = 10/11, to 12 digits.
    assert!(stdout.contains("0.322580645161"), "stdout: {stdout}");
    assert!(
        stdout.contains("p0    = 0.354838709677"),
        "stdout: {stdout}"
    );
}

#[test]
fn missing_required_parameter_names_it_and_exits_2() {
    let output = bin()
        .arg("steady-state")
        .args(["--g1-re", "10", "--g2-re", "10", "--omega21", "100"])
        .args(["--n-thermal", "10", "--eta", "0"])
        .output()
        .expect("binary runs");
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("kappa"));
}

#[test]
fn spectrum_rejects_empty_grid() {
    let dir = tempfile::tempdir().expect("tempdir");
    let output = bin()
        .arg("spectrum")
        .args(["--preset", "fig1a"])
        .args([
            "--omega-min",
            "-1",
            "--omega-max",
            "1",
            "--omega-steps",
            "0",
        ])
        .args(["--output"])
        .arg(dir.path().join("s.csv"))
        .output()
        .expect("binary runs");
    assert_eq!(
        output.status.code(),
        Some(2),
        "stderr: {}",
        stderr_of(&output)
    );
}

#[test]
fn spectrum_rejects_partial_grid_flags() {
    let dir = tempfile::tempdir().expect("tempdir");
    let output = bin()
        .arg("spectrum")
        .args(["--preset", "fig1a"])
        .args(["--omega-min", "-1"])
        .args(["--output"])
        .arg(dir.path().join("s.csv"))
        .output()
        .expect("binary runs");
    assert_eq!(
        output.status.code(),
        Some(2),
        "stderr: {}",
        stderr_of(&output)
    );
}

#[test]
fn preset_list_prints_every_name() {
    let output = bin()
        .args(["preset", "list"])
        .output()
        .expect("binary runs");
    assert!(output.status.success());
    let stdout = stdout_of(&output);
    let names: Vec<&str> = stdout.lines().collect();
    assert_eq!(names.len(), 23);
    assert!(names.contains(&"fig1a"));
    assert!(names.contains(&"fig4"));
    assert!(names.contains(&"fig5d"));
}

#[test]
fn spectrum_preset_writes_csv_peaks_and_manifest() {
    let dir = tempfile::tempdir().expect("tempdir");
    let csv = dir.path().join("fig1a.csv");
    let output = bin()
        .arg("spectrum")
        .args(["--preset", "fig1a", "--eta", "0"])
        .args(["--output"])
        .arg(&csv)
        .output()
        .expect("binary runs");
    assert!(output.status.success(), "stderr: {}", stderr_of(&output));

    let text = std::fs::read_to_string(&csv).expect("csv written");
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "omega,total,pop_part,coh_part");
    assert_eq!(lines.len(), 4002, "header plus the default 4001-point grid");

    let stdout = stdout_of(&output);
    assert!(stdout.contains("peaks"), "stdout: {stdout}");

    let manifest_path = dir.path().join("fig1a.manifest.json");
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest_path).expect("manifest"))
            .expect("manifest is JSON");
    assert_eq!(manifest["subcommand"], "spectrum");
    assert_eq!(manifest["params"]["eta"], 0.0);
    assert_eq!(manifest["settings"]["grid"]["points"], 4001);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = dir.path().join("run.cfg");
    std::fs::write(
        &config,
        "g1_re = 10\ng2_re = 10\nkappa = 100\nomega21 = 100\nn_thermal = 10\neta = 1\ndelta = 0\n",
    )
    .expect("config written");
    let manifest_path = dir.path().join("manifest.json");
    let output = bin()
        .arg("steady-state")
        .args(["--config"])
        .arg(&config)
        .args(["--delta", "42"])
        .args(["--manifest"])
        .arg(&manifest_path)
        .output()
        .expect("binary runs");
    assert!(output.status.success(), "stderr: {}", stderr_of(&output));

    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest_path).expect("manifest"))
            .expect("manifest is JSON");
    assert_eq!(manifest["params"]["delta"], 42.0);
    assert_eq!(manifest["params"]["kappa"], 100.0);
}

fn run_sweep(preset: &str, dir: &Path, workers: &str) {
    let output = bin()
        .arg("sweep")
        .args(["--preset", preset, "--workers", workers])
        .args(["--out-dir"])
        .arg(dir)
        .output()
        .expect("binary runs");
    assert!(output.status.success(), "stderr: {}", stderr_of(&output));
}

#[test]
fn sweep_outputs_are_identical_across_worker_counts() {
    let one = tempfile::tempdir().expect("tempdir");
    let eight = tempfile::tempdir().expect("tempdir");
    run_sweep("fig5a", one.path(), "1");
    run_sweep("fig5a", eight.path(), "8");
    for name in ["fig5a_1.csv", "fig5a_1.json"] {
        let a = std::fs::read(one.path().join(name)).expect("first run output");
        let b = std::fs::read(eight.path().join(name)).expect("second run output");
        assert_eq!(a, b, "{name} differs between worker counts");
    }
    assert!(one.path().join("manifest.json").exists());
}

#[test]
fn oracle_compare_reports_deviations_as_json() {
    let output = bin()
        .arg("oracle-compare")
        .args(["--g1-re", "0.5", "--g2-re", "0.5", "--kappa", "3"])
        .args(["--omega21", "1", "--n-thermal", "0", "--eta", "1"])
        .args(["--n-max", "6", "--n-max-check", "8"])
        .output()
        .expect("binary runs");
    assert!(output.status.success(), "stderr: {}", stderr_of(&output));
    let report: Value = serde_json::from_str(&stdout_of(&output)).expect("report is JSON");
    assert!(report["oracle"].is_object());
    let p0_abs = report["deviation"]["p0"]["abs"].as_f64().expect("p0 abs");
    assert!(p0_abs < 1e-6, "p0 deviation {p0_abs}");
    let delta = report["convergence"]["max_marginal_change"]
        .as_f64()
        .expect("convergence delta");
    assert!(delta < 1e-6, "truncation delta {delta}");
}

#[test]
fn oracle_compare_guards_partial_interference() {
    let base = [
        "--g1-re",
        "0.5",
        "--g2-re",
        "0.5",
        "--kappa",
        "3",
        "--omega21",
        "1",
        "--n-thermal",
        "0",
        "--eta",
        "0.5",
        "--n-max",
        "4",
    ];
    let refused = bin()
        .arg("oracle-compare")
        .args(base)
        .output()
        .expect("binary runs");
    assert_eq!(refused.status.code(), Some(2));

    let reduced_only = bin()
        .arg("oracle-compare")
        .args(base)
        .arg("--force-reduced-only")
        .output()
        .expect("binary runs");
    assert!(reduced_only.status.success());
    let report: Value = serde_json::from_str(&stdout_of(&reduced_only)).expect("report is JSON");
    assert!(report["oracle"].is_null());
}

#[test]
fn oracle_compare_rejects_oversized_fock_space() {
    let output = bin()
        .arg("oracle-compare")
        .args(["--g1-re", "0.5", "--g2-re", "0.5", "--kappa", "3"])
        .args(["--omega21", "1", "--n-thermal", "0", "--eta", "1"])
        .args(["--n-max", "140", "--n-max-check", "141"])
        .output()
        .expect("binary runs");
    assert_eq!(
        output.status.code(),
        Some(5),
        "stderr: {}",
        stderr_of(&output)
    );
}
