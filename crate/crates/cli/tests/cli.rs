use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use memchan::channel::{amplitude_damping, constant_channel};
use memchan::device::swap_device;
use memchan::repeatability::stinespring_device;
use memchan::{DensityOperator, RandomUnitarySpec};
use serde_json::Value;
use tempfile::TempDir;

fn memchan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_memchan"))
        .args(args)
        .env_remove("MEMCHAN_TOLERANCE")
        .output()
        .expect("binary runs")
}

fn write_json(dir: &TempDir, name: &str, value: &impl serde::Serialize) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

#[test]
fn controlled_u_dephasing_is_repeatable() {
    let dir = TempDir::new().unwrap();
    let spec = write_json(&dir, "spec.json", &RandomUnitarySpec::dephasing(0.5).unwrap());
    let out = memchan(&["dilate", p(&spec)]);
    assert_eq!(out.status.code(), Some(0));
    let device = dir.path().join("device.json");
    std::fs::write(&device, &out.stdout).unwrap();

    let out = memchan(&["repeat-check", p(&device), p(&spec), "--n", "50"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["first_deviating_step"], Value::Null);
    assert_eq!(report["n_requested"], 50);
    assert_eq!(report["seed"], 0xC0FFEE);
}

#[test]
fn swap_device_deviates_on_second_use() {
    let dir = TempDir::new().unwrap();
    let xi = DensityOperator::basis(2, 0);
    let device = write_json(&dir, "swap.json", &swap_device(xi.clone()).unwrap());
    let target = write_json(&dir, "constant.json", &constant_channel(&xi));
    let out = memchan(&["repeat-check", p(&device), p(&target), "--n", "2", "--worst-case"]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert_eq!(report["first_deviating_step"], 2);
    assert_eq!(report["passed"], false);
}

#[test]
fn malformed_json_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"dim_m\": 2,").unwrap();
    let out = memchan(&["repeat-check", p(&bad), p(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("invalid JSON"), "{stderr}");
}

#[test]
fn bound_reports_limits() {
    let dir = TempDir::new().unwrap();
    let ad = write_json(&dir, "ad.json", &amplitude_damping(0.5).unwrap());
    let out = memchan(&["bound", p(&ad), "2"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["n_max_mixture"], 5);
    assert_eq!(report["delta_at_mixture"], "0.188721875541");

    let out = memchan(&["bound", p(&ad), "1"]);
    assert_eq!(stdout_json(&out)["n_max_mixture"], 0);

    let dephasing = write_json(&dir, "dephasing.json", &RandomUnitarySpec::dephasing(0.2).unwrap());
    let out = memchan(&["bound", p(&dephasing), "2"]);
    assert_eq!(stdout_json(&out)["n_max_mixture"], "unbounded");
}

#[test]
fn dilating_the_pauli_twirl_gives_an_8x8_unitary() {
    let dir = TempDir::new().unwrap();
    let spec = write_json(&dir, "twirl.json", &RandomUnitarySpec::pauli_twirl());
    let out = memchan(&["dilate", p(&spec)]);
    assert_eq!(out.status.code(), Some(0));
    let device = stdout_json(&out);
    assert_eq!(device["unitary"]["rows"], 8);
    assert_eq!(device["unitary"]["cols"], 8);
    assert_eq!(device["dim_m"], 4);
    assert_eq!(device["dim_s"], 2);
}

#[test]
fn audit_flags_a_corrupted_transcript() {
    let dir = TempDir::new().unwrap();
    let device = write_json(&dir, "ad.json", &stinespring_device(&amplitude_damping(0.5).unwrap()).unwrap());
    let mixed = write_json(&dir, "mixed.json", &DensityOperator::maximally_mixed(2));
    let out = memchan(&["transcript", p(&device), "--n", "4", "--input", p(&mixed)]);
    assert_eq!(out.status.code(), Some(0));
    let transcript = dir.path().join("t.json");
    std::fs::write(&transcript, &out.stdout).unwrap();
    let out = memchan(&["entropy-audit", p(&transcript), "2"]);
    assert_eq!(out.status.code(), Some(0));

    let mut t = stdout_json(&memchan(&["transcript", p(&device), "--n", "4", "--input", p(&mixed)]));
    t["outputs"][2] = serde_json::to_value(DensityOperator::basis(2, 0)).unwrap();
    let corrupted = write_json(&dir, "corrupted.json", &t);
    let out = memchan(&["entropy-audit", p(&corrupted), "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["first_violation"], 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("n=3"));
}

#[test]
fn demo_swap_separates_the_orderings() {
    let out = memchan(&["demo-swap", "--shots", "100"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    let inter: f64 = report["inter_estimate_distance"].as_str().unwrap().parse().unwrap();
    assert!(inter >= 0.4);
    assert_eq!(memchan(&["demo-swap", "--shots", "0"]).status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let xi = DensityOperator::basis(2, 0);
    let device = write_json(&dir, "swap.json", &swap_device(xi.clone()).unwrap());
    let target = write_json(&dir, "constant.json", &constant_channel(&xi));
    for args in [
        vec!["demo-swap", "--shots", "20", "--mode", "sampled", "--seed", "7"],
        vec!["transcript", p(&device), "--n", "5"],
        vec!["repeat-check", p(&device), p(&target), "--n", "3"],
    ] {
        let a = memchan(&args);
        let b = memchan(&args);
        assert!(!a.stdout.is_empty(), "{}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn out_flag_writes_the_report_to_a_file() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("report.json");
    let out = memchan(&["demo-swap", "--shots", "5", "--out", p(&target)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(report["command"], "demo-swap");
}

#[test]
fn tolerance_can_be_set_from_the_environment() {
    let dir = TempDir::new().unwrap();
    let spec = write_json(&dir, "spec.json", &RandomUnitarySpec::dephasing(0.5).unwrap());
    let run = |tol: &str| {
        Command::new(env!("CARGO_BIN_EXE_memchan"))
            .args(["bound", p(&spec), "2"])
            .env("MEMCHAN_TOLERANCE", tol)
            .output()
            .unwrap()
    };
    let out = run("1e-6");
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["tolerance"], "1.00000000000e-6");
    assert_eq!(run("-3").status.code(), Some(2));
}
