//! Exit-code contract and output determinism of the installed binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entroshift"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp(tag: &str) -> PathBuf {
    std::env::temp_dir().join(format!("entroshift-cli-{tag}"))
}

#[test]
fn entropic_scenarios_exit_zero() {
    for name in ["shock.json", "merging.json", "threestep.json"] {
        let out = tmp(&format!("ok-{name}"));
        let res = run(&[
            "run",
            "--scenario",
            scenario(name).to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(res.status.code(), Some(0), "{name}: {res:?}");
        for file in ["result.json", "profiles.csv", "fronts.csv", "shift.csv"] {
            assert!(out.join(file).exists(), "{name} missing {file}");
        }
    }
}

#[test]
fn nonentropic_scenario_exits_one_with_diagnostic() {
    let out = tmp("ne");
    let res = run(&[
        "run",
        "--scenario",
        scenario("nonentropic.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(1));
    let text = String::from_utf8_lossy(&res.stdout).to_string();
    assert!(text.contains("Lambda"), "missing dissipation diagnostic:\n{text}");
    assert!(text.contains("FAIL"));
}

#[test]
fn parse_and_validation_failures_exit_two() {
    let dir = tmp("bad");
    std::fs::create_dir_all(&dir).unwrap();
    let malformed = dir.join("malformed.json");
    std::fs::write(&malformed, "{ not json").unwrap();
    let cases: Vec<(String, &str)> = vec![
        (malformed.to_str().unwrap().to_string(), "malformed"),
        (dir.join("absent.json").to_str().unwrap().to_string(), "missing file"),
    ];
    for (path, what) in cases {
        let res = run(&["run", "--scenario", &path, "--out", dir.to_str().unwrap()]);
        assert_eq!(res.status.code(), Some(2), "{what} should exit 2");
    }

    // Schema drift and physically inadmissible data are load errors too.
    let wrong_schema = dir.join("schema2.json");
    std::fs::write(
        &wrong_schema,
        r#"{"schema": 2, "model": {"flux": "burgers", "entropy": "square", "state_bound": 2.0},
            "initial_data": {"states": [1.0, -1.0], "positions": [0.0]},
            "horizon": 1.0, "window": 2.0, "eps": 0.01}"#,
    )
    .unwrap();
    let res = run(&["run", "--scenario", wrong_schema.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));

    let concave = dir.join("concave.json");
    std::fs::write(
        &concave,
        r#"{"schema": 1, "model": {"flux": {"polynomial": [0.0, 0.0, -0.5]}, "entropy": "square", "state_bound": 2.0},
            "initial_data": {"states": [1.0, -1.0], "positions": [0.0]},
            "horizon": 1.0, "window": 2.0, "eps": 0.01}"#,
    )
    .unwrap();
    let res = run(&["run", "--scenario", concave.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2), "convexity-violating flux is rejected at load");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let (a, b) = (tmp("det-a"), tmp("det-b"));
    for out in [&a, &b] {
        let res = run(&[
            "run",
            "--scenario",
            scenario("threestep.json").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(res.status.code(), Some(0));
    }
    for file in ["result.json", "profiles.csv", "fronts.csv", "shift.csv"] {
        let x = std::fs::read(a.join(file)).unwrap();
        let y = std::fs::read(b.join(file)).unwrap();
        assert_eq!(x, y, "{file} differs between identical runs");
    }
}

#[test]
fn check_lemmas_is_deterministic_for_a_fixed_seed() {
    let one = run(&["check-lemmas", "--samples", "40", "--seed", "11"]);
    let two = run(&["check-lemmas", "--samples", "40", "--seed", "11"]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn remaining_subcommands_run_clean() {
    let out = tmp("aux");
    let sc = scenario("shock.json");
    let sc = sc.to_str().unwrap();
    let res = run(&["build-psi", "--scenario", sc, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0));
    assert!(out.join("psi.json").exists());

    let res = run(&["verify-condition-e", "--scenario", sc]);
    assert_eq!(res.status.code(), Some(0));

    let res = run(&["export-fronts", "--scenario", sc, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("fronts.csv")).unwrap();
    assert!(csv.starts_with("t,x,left,right\n"));
    assert!(csv.lines().count() >= 3);
}

#[test]
fn quad_tol_env_var_is_honored_and_validated() {
    let out = tmp("env");
    let ok = Command::new(env!("CARGO_BIN_EXE_entroshift"))
        .args([
            "run",
            "--scenario",
            scenario("shock.json").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .env("ENTROSHIFT_QUAD_TOL", "1e-13")
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));

    let bad = Command::new(env!("CARGO_BIN_EXE_entroshift"))
        .args([
            "run",
            "--scenario",
            scenario("shock.json").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .env("ENTROSHIFT_QUAD_TOL", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
