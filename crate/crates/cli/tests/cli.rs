use std::path::Path;
use std::process::{Command, Output};

use klfactor::sim::{GarchParams, KlFactorSpec};
use serde_json::Value;

fn klfactor(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_klfactor"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .env_remove("KLFACTOR_OUT_DIR")
        .output()
        .expect("spawn klfactor")
}

fn ok_json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("summary json")
}

fn simulate(dir: &Path, days: usize) {
    let params = vec![GarchParams::unit_variance(0.5, 0.1, 0.8); 2];
    let spec = KlFactorSpec::ar_garch(24, vec![3.0, 1.0], params, 0.01, 11);
    let spec_path = dir.join("spec.json");
    std::fs::write(&spec_path, serde_json::to_vec(&spec).unwrap()).unwrap();
    let s = ok_json(&klfactor(
        dir,
        &["simulate", "--spec", spec_path.to_str().unwrap(), "--days", &days.to_string(), "--burn-in", "200"],
    ));
    assert_eq!(s["N"], days);
    assert_eq!(s["T"], 24);
}

#[test]
fn simulate_fpca_backtest_rolling() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulate(d, 160);
    let panel = d.join("panel.csv");
    let panel = panel.to_str().unwrap();
    assert!(d.join("true_scores.csv").exists());

    let f = ok_json(&klfactor(d, &["fpca", "--panel", panel]));
    assert!(f["J"].as_u64().unwrap() >= 1);
    let basis: Value = serde_json::from_slice(&std::fs::read(d.join("basis.json")).unwrap()).unwrap();
    assert!(basis.is_object());
    let scores = std::fs::read_to_string(d.join("scores.csv")).unwrap();
    assert_eq!(scores.lines().count(), 161);

    let b = ok_json(&klfactor(
        d,
        &["backtest", "--panel", panel, "--window", "120", "--horizon-days", "3", "--methods", "argarch,var_sbekk"],
    ));
    assert_eq!(b["aggregates"].as_array().unwrap().len(), 2);
    let table = std::fs::read_to_string(d.join("table.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    assert!(d.join("report.json").exists() && d.join("forecasts.json").exists());

    let fc = ok_json(&klfactor(d, &["forecast", "--panel", panel, "--window", "120", "--method", "VAR_SBEKK"]));
    assert_eq!(fc["method"], "VAR_SBEKK");
    let rows = std::fs::read_to_string(d.join("forecast.csv")).unwrap();
    assert_eq!(rows.lines().count(), 25);

    let r = ok_json(&klfactor(d, &["rolling", "--panel", panel, "--k", "4", "--window", "60", "--n-forecasts", "20"]));
    assert!(r["rmse"].as_f64().unwrap().is_finite());
    let rolling = std::fs::read_to_string(d.join("rolling.csv")).unwrap();
    assert_eq!(rolling.lines().count(), 1 + 20 * 4);

    let a = ok_json(&klfactor(d, &["diag-acf", "--panel", panel, "--max-lag", "5"]));
    assert!(a["J"].as_u64().unwrap() >= 1);
    assert!(d.join("acf.json").exists());
}

#[test]
fn ingest_prices() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut csv = String::from("timestamp,price\n");
    let mut p = 100.0f64;
    for i in 0..(10 * 24 + 1) {
        p *= 1.0 + 0.001 * ((i * 7 % 13) as f64 - 6.0);
        csv.push_str(&format!("{},{p}\n", i * 3600));
    }
    let prices = d.join("prices.csv");
    std::fs::write(&prices, csv).unwrap();
    let s = ok_json(&klfactor(d, &["ingest", "--prices", prices.to_str().unwrap()]));
    assert_eq!(s["T"], 24);
    assert!(s["N"].as_u64().unwrap() >= 9);
    assert!(d.join("panel.csv").exists() && d.join("panel.json").exists());
}

#[test]
fn exit_codes_follow_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulate(d, 40);
    let panel = d.join("panel.csv");
    let panel = panel.to_str().unwrap();

    let o = klfactor(d, &["rolling", "--panel", panel, "--k", "24"]);
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "BadHorizon");

    let o = klfactor(d, &["backtest", "--panel", panel, "--window", "500"]);
    assert_eq!(o.status.code(), Some(3));

    let o = klfactor(d, &["forecast", "--panel", panel, "--method", "nope"]);
    assert_eq!(o.status.code(), Some(2));

    let prices = d.join("bad.csv");
    std::fs::write(&prices, "timestamp,price\n0,1.0\n3600,-2.0\n").unwrap();
    let o = klfactor(d, &["ingest", "--prices", prices.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "NonPositivePrice");
}

#[test]
fn out_dir_from_env_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulate(d, 30);
    let panel = d.join("panel.csv");

    let env_out = d.join("from_env");
    let o = Command::new(env!("CARGO_BIN_EXE_klfactor"))
        .args(["fpca", "--panel", panel.to_str().unwrap()])
        .env("KLFACTOR_OUT_DIR", &env_out)
        .output()
        .unwrap();
    ok_json(&o);
    assert!(env_out.join("basis.json").exists());

    let cfg_out = d.join("from_config");
    let cfg = d.join("cfg.json");
    std::fs::write(&cfg, serde_json::json!({ "out_dir": cfg_out, "delta": 0.99 }).to_string()).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_klfactor"))
        .args(["--config", cfg.to_str().unwrap(), "fpca", "--panel", panel.to_str().unwrap()])
        .env_remove("KLFACTOR_OUT_DIR")
        .output()
        .unwrap();
    let s = ok_json(&o);
    assert!(s["cpv"].as_f64().unwrap() >= 0.99);
    assert!(cfg_out.join("scores.csv").exists());

    std::fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    let o = klfactor(d, &["--config", cfg.to_str().unwrap(), "fpca", "--panel", panel.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
