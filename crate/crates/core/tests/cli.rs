use std::path::Path;
use std::process::{Command, Output};

fn stochwave(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stochwave"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

const SMALL: [&str; 6] = ["--set", "ladder.mesh=3", "--set", "problem.T=0.25", "--set", "mc.realizations=4"];

#[test]
fn check_passes_with_defaults() {
    let d = tempfile::tempdir().unwrap();
    let o = stochwave(d.path(), &["check"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 6, "{stdout}");
    assert!(d.path().join("check.csv").exists());
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("check.metadata.json")).unwrap()).unwrap();
    assert!(meta["config"]["problem"]["degree"] == 1);
}

#[test]
fn check_fails_for_tiny_penalty() {
    let d = tempfile::tempdir().unwrap();
    let o = stochwave(d.path(), &["check", "--set", "problem.sigma0=0.01"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL coercivity"));
}

#[test]
fn invalid_axis_is_a_config_error() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&stochwave(d.path(), &["converge", "--axis", "diagonal"])), 2);
}

#[test]
fn unknown_key_and_missing_file_are_config_errors() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("bad.cfg");
    std::fs::write(&cfg, "problem.degree = 1\nproblem.colour = red\n").unwrap();
    assert_eq!(code(&stochwave(d.path(), &["simulate", "--config", cfg.to_str().unwrap()])), 2);
    assert_eq!(code(&stochwave(d.path(), &["simulate", "--config", "/nonexistent/x.cfg"])), 2);
    assert_eq!(code(&stochwave(d.path(), &["simulate", "--set", "noise.s=-1"])), 2);
}

#[test]
fn cfl_violation_exits_3_unless_allowed() {
    let d = tempfile::tempdir().unwrap();
    let mut args = vec!["simulate", "--set", "time.tau=0.0625"];
    args.extend(SMALL);
    let o = stochwave(d.path(), &args);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("CFL"));
    args.push("--allow-unstable");
    assert_eq!(code(&stochwave(d.path(), &args)), 0);
}

#[test]
fn output_is_byte_identical_across_job_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut args = vec!["simulate", "--seed", "11"];
    args.extend(SMALL);
    let mut one = args.clone();
    one.extend(["--jobs", "1"]);
    let mut three = args.clone();
    three.extend(["--jobs", "3"]);
    assert_eq!(code(&stochwave(a.path(), &one)), 0);
    assert_eq!(code(&stochwave(b.path(), &three)), 0);
    let x = std::fs::read(a.path().join("simulate.csv")).unwrap();
    let y = std::fs::read(b.path().join("simulate.csv")).unwrap();
    assert_eq!(x, y);
    let c = tempfile::tempdir().unwrap();
    let mut other = args.clone();
    other[2] = "12";
    assert_eq!(code(&stochwave(c.path(), &other)), 0);
    assert_ne!(x, std::fs::read(c.path().join("simulate.csv")).unwrap());
}

#[test]
fn zero_step_run_writes_initial_row() {
    let d = tempfile::tempdir().unwrap();
    let o = stochwave(d.path(), &["simulate", "--set", "problem.T=0", "--set", "ladder.mesh=3"]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(d.path().join("simulate.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("0.0000000000000000e0,"));
}

#[test]
fn flags_override_config_file() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.cfg");
    std::fs::write(&cfg, "# small run\nnoise.seed = 5\nladder.mesh = 3\nproblem.T = 0.25\nmc.realizations = 2\n").unwrap();
    let o = stochwave(d.path(), &["simulate", "--config", cfg.to_str().unwrap(), "--seed", "9"]);
    assert_eq!(code(&o), 0);
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("simulate.metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 9);
    assert_eq!(meta["realizations"], 2);
    assert!(meta["cfl_margin"].as_f64().unwrap() < 1.0);
}

#[test]
fn converge_and_energy_write_tables() {
    let d = tempfile::tempdir().unwrap();
    let o = stochwave(
        d.path(),
        &["converge", "--axis", "space", "--set", "ladder.space=2..4", "--set", "ladder.space_ref=6", "--set", "mc.realizations=2", "--set", "problem.T=0.25"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("fitted rate"));
    let table = std::fs::read_to_string(d.path().join("converge_space.csv")).unwrap();
    assert_eq!(table.lines().count(), 4);
    assert!(d.path().join("efficiency.csv").exists());

    let o = stochwave(
        d.path(),
        &["energy", "--set", "problem.nonlinearity=zero", "--set", "ladder.mesh=2", "--set", "energy.T=1", "--set", "mc.realizations=8", "--set", "schemes=svm,sem"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.path().join("energy_svm.csv").exists() && d.path().join("energy_sem.csv").exists());

    let o = stochwave(
        d.path(),
        &["energy", "--set", "problem.nonlinearity=zero", "--set", "ladder.mesh=2", "--set", "energy.T=1", "--set", "mc.realizations=2", "--set", "output.stride=100000"],
    );
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(d.path().join("energy_svm.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3, "{csv}");
}
