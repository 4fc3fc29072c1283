//! The `petal` binary on the bundled six-turbine instance.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use petal::cli::{run_cli, EXIT_INVALID, EXIT_OK, EXIT_SOLVER};

fn instance() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/six-turbines.toml")
}

fn petal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_petal")).args(args).output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    petal(args).status.code().unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["frobnicate"]), EXIT_INVALID);
    assert_eq!(code(&["solve-det"]), EXIT_INVALID);
    assert_eq!(code(&["solve-det", "-i", "/nonexistent/farm.toml"]), EXIT_INVALID);
    assert_eq!(run_cli(["petal", "--version"]), EXIT_OK);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    let text = fs::read_to_string(instance()).unwrap().replace("phi = 4", "phi = 1");
    fs::write(&bad, text).unwrap();
    assert_eq!(code(&["solve-det", "-i", bad.to_str().unwrap(), "-o", dir.path().to_str().unwrap()]), EXIT_INVALID);

    let tight = dir.path().join("tight.toml");
    let text = fs::read_to_string(instance())
        .unwrap()
        .replace("capacity_a = 530.0", "capacity_a = 150.0")
        .replace("capacity_a = 300.0", "capacity_a = 100.0");
    fs::write(&tight, text).unwrap();
    assert_eq!(code(&["solve-det", "-i", tight.to_str().unwrap(), "-o", dir.path().to_str().unwrap()]), EXIT_SOLVER);
}

#[test]
fn workflow() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let inst = instance();
    let inst = inst.to_str().unwrap();

    let r = petal(&["solve-det", "-i", inst, "-o", out]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(String::from_utf8_lossy(&r.stdout).contains("reliability 0.00"));
    let r = petal(&["solve-stoch", "-i", inst, "-o", out]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    for f in ["design-deterministic.toml", "layout-deterministic.svg", "design-stochastic.toml", "layout-stochastic.svg", "pci-trace.txt"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert!(fs::read_to_string(dir.path().join("pci-trace.txt")).unwrap().contains("converged=true"));

    let design = dir.path().join("design-deterministic.toml");
    let design = design.to_str().unwrap();
    assert_eq!(code(&["evaluate", "-i", inst, "-o", out, "-d", design, "--mtbf", "5"]), EXIT_OK);
    let csv = fs::read_to_string(dir.path().join("evaluation.csv")).unwrap();
    assert!(csv.starts_with("wind,state,failed_edge,probability,curtailment_a,cost\n"));
    assert!(csv.lines().count() > 4);

    assert_eq!(code(&["mc-validate", "-i", inst, "-o", out, "-d", design, "--samples", "2000", "--seed", "3"]), EXIT_OK);
    let mc = fs::read_to_string(dir.path().join("mc-validation.csv")).unwrap();
    assert_eq!(mc.lines().count(), 2);
    assert_eq!(mc, {
        petal(&["mc-validate", "-i", inst, "-o", out, "-d", design, "--samples", "2000", "--seed", "3"]);
        fs::read_to_string(dir.path().join("mc-validation.csv")).unwrap()
    });

    assert_eq!(code(&["render", "-i", inst, "-o", out, "-d", design]), EXIT_OK);
    assert!(fs::read_to_string(dir.path().join("design-deterministic.svg")).unwrap().starts_with("<svg"));

    assert_eq!(code(&["export-mps", "-i", inst, "-o", out, "--tree", "deterministic"]), EXIT_OK);
    let mps = fs::read_to_string(dir.path().join("model.mps")).unwrap();
    assert!(mps.starts_with("NAME") && mps.ends_with("ENDATA\n"));

    assert_eq!(code(&["evaluate", "-i", inst, "-o", out, "-d", design, "--mtbf", "5,10"]), EXIT_INVALID);
}

#[test]
fn compare_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let inst = instance();
    let r = petal(&["compare", "-i", inst.to_str().unwrap(), "-o", out, "--mtbf", "2,20,200"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = fs::read_to_string(dir.path().join("comparison.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        // stochastic total never exceeds the deterministic design's total
        assert!(r[8] <= r[4] * (1.0 + 1e-9), "{r:?}");
    }
    assert!(dir.path().join("mtbf-20/design-stochastic.toml").exists());
}
