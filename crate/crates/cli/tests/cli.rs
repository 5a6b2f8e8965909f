//! End-to-end tests of the binary: exit codes, artifact layout, determinism.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aggraph"))
}

fn write_scenario(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("scenario.json");
    std::fs::write(&path, body).unwrap();
    path
}

const QUICK: &str = r#"{
    "name": "quick",
    "initial": {"kind": "bump_sum", "components": [{"center": 0.0, "halfwidth": 1.0, "amplitude": 0.1, "shape_exponent": 3}]},
    "grid": {"n": 129},
    "solver": {"dt": 0.005, "t_end": 0.2},
    "outputs": {"snapshot_cadence": 0.1},
    "seed": 5
}"#;

#[test]
fn run_produces_artifacts_and_exit_zero() {
    let tmp = tempdir("run_ok");
    let sc = write_scenario(&tmp, QUICK);
    let out = tmp.join("out");
    let status = bin()
        .args(["run", "--scenario"])
        .arg(&sc)
        .args(["--check", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "exit 0 expected");
    for f in ["monitors.csv", "invariants.json", "run_summary.json", "state_0000.json", "velocity_final.csv"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let monitors = std::fs::read_to_string(out.join("monitors.csv")).unwrap();
    assert!(monitors.starts_with("t,mass,"));
}

#[test]
fn bad_scenario_exits_two() {
    let tmp = tempdir("run_bad");
    let sc = write_scenario(&tmp, &QUICK.replace("\"amplitude\": 0.1", "\"amplitude\": -0.1"));
    let output = bin().args(["run", "--scenario"]).arg(&sc).output().unwrap();
    assert_eq!(output.status.code(), Some(2), "input error must exit 2");
    let msg = String::from_utf8_lossy(&output.stderr);
    assert!(msg.contains("positive"), "{msg}");
}

#[test]
fn cfl_violation_exits_two_with_dt_max() {
    let tmp = tempdir("run_cfl");
    let sc = write_scenario(&tmp, &QUICK.replace("\"dt\": 0.005", "\"dt\": 5.0"));
    let output = bin().args(["run", "--scenario"]).arg(&sc).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&output.stderr);
    assert!(msg.contains("CFL") && msg.contains("dt_max"), "{msg}");
}

#[test]
fn missing_builtin_exits_two() {
    let output = bin().args(["run", "--builtin", "nope"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn artifacts_are_byte_identical_across_runs() {
    let tmp = tempdir("determinism");
    let sc = write_scenario(&tmp, QUICK);
    let (a, b) = (tmp.join("a"), tmp.join("b"));
    for out in [&a, &b] {
        let status = bin().args(["run", "--scenario"]).arg(&sc).arg("--out").arg(out).status().unwrap();
        assert!(status.success());
    }
    for f in ["monitors.csv", "state_0000.json", "state_final.csv", "velocity_final.csv", "invariants.json"] {
        let x = std::fs::read(a.join(f)).unwrap();
        let y = std::fs::read(b.join(f)).unwrap();
        assert_eq!(x, y, "{f} differs between identical runs");
    }
}

#[test]
fn artifacts_independent_of_thread_count() {
    // per-node sums run in a fixed order, so the worker count cannot change
    // a single bit of the output
    let tmp = tempdir("threads");
    let sc = write_scenario(&tmp, QUICK);
    let (a, b) = (tmp.join("t1"), tmp.join("t2"));
    for (out, threads) in [(&a, "1"), (&b, "2")] {
        let status = bin()
            .env("AGGRE_THREADS", threads)
            .args(["run", "--scenario"])
            .arg(&sc)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    for f in ["monitors.csv", "state_final.csv", "velocity_final.csv"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f} depends on thread count"
        );
    }
}

#[test]
fn probe_deterministic_and_writes_details() {
    let tmp = tempdir("probe");
    let (a, b) = (tmp.join("a"), tmp.join("b"));
    for out in [&a, &b] {
        let status = bin()
            .args(["probe", "--samples", "3", "--seed", "9", "--details", "--out"])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let x = std::fs::read(a.join("probe_report.json")).unwrap();
    let y = std::fs::read(b.join("probe_report.json")).unwrap();
    assert_eq!(x, y);
    assert!(a.join("probe_samples.csv").exists());
}

const LONG: &str = r#"{
    "name": "quick_long",
    "initial": {"kind": "bump_sum", "components": [{"center": 0.0, "halfwidth": 1.0, "amplitude": 0.1, "shape_exponent": 3}]},
    "grid": {"n": 193},
    "solver": {"dt": 0.005, "t_end": 6.5, "mode": "rescaled"},
    "outputs": {"snapshot_cadence": 0.5},
    "seed": 5
}"#;

#[test]
fn asymptotics_extracts_profile() {
    let tmp = tempdir("asym");
    let sc = write_scenario(&tmp, LONG);
    let out = tmp.join("out");
    let output = bin()
        .args(["asymptotics", "--scenario"])
        .arg(&sc)
        .args(["--check", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    for f in ["profile.json", "hausdorff.csv", "weak_convergence.csv", "invariants.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let profile = std::fs::read_to_string(out.join("profile.json")).unwrap();
    assert!(profile.contains("cauchy_gap"));
}

#[test]
fn oracle_check_passes_on_bump() {
    let tmp = tempdir("oracle");
    let sc = write_scenario(&tmp, QUICK);
    let out = tmp.join("out");
    let status = bin()
        .args(["oracle-check", "--scenario"])
        .arg(&sc)
        .args(["--check", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out.join("oracle_velocity.csv")).unwrap();
    assert!(csv.starts_with("x,quantity,model_value,oracle_value,abs_err"));
    assert!(csv.lines().count() > 20);
}

fn tempdir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("aggraph_cli_{tag}_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
