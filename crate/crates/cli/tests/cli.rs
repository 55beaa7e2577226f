// Literal betas below are what a user types on the command line.
#![allow(clippy::approx_constant)]

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wormszego"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_input(dir: &Path) -> std::path::PathBuf {
    let (n, m) = (64usize, 4usize);
    let (x_min, x_max) = (-8.0, 8.0);
    let dx = (x_max - x_min) / n as f64;
    let mut csv = String::from("sheet,k,m,re,im\n");
    for sheet in [1, 3] {
        for mm in 0..m {
            let t = 2.0 * PI * mm as f64 / m as f64;
            for k in 0..n {
                let x = x_min + k as f64 * dx;
                let a = (-(x - 0.5 * sheet as f64).powi(2)).exp();
                csv.push_str(&format!("{sheet},{k},{mm},{},{}\n", a * t.cos(), a * t.sin()));
            }
        }
    }
    let f = dir.join("in.csv");
    fs::write(&f, csv).unwrap();
    fs::write(
        dir.join("in.grid.json"),
        format!(r#"{{"beta": {}, "x_min": {x_min}, "x_max": {x_max}, "n": {n}, "M": {m}}}"#, 2.0 * PI),
    )
    .unwrap();
    f
}

fn read_values(path: &Path) -> Vec<(f64, f64)> {
    let mut r = csv::Reader::from_path(path).unwrap();
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), ["sheet", "k", "m", "re", "im"]);
    r.records().map(|row| {
        let row = row.unwrap();
        (row[3].parse().unwrap(), row[4].parse().unwrap())
    })
    .collect()
}

#[test]
fn project_writes_field_and_sidecar_and_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_input(dir.path());
    let once = dir.path().join("once.csv");
    let twice = dir.path().join("twice.csv");
    let rep = dir.path().join("rep.json");
    let out = run(&["project", "--input", input.to_str().unwrap(), "--output", once.to_str().unwrap(), "--report", rep.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let side = report(&dir.path().join("once.grid.json"));
    for key in ["beta", "x_min", "x_max", "n", "M"] {
        assert!(side.get(key).is_some(), "sidecar lacks {key}");
    }
    assert_eq!(side["n"], 64);
    assert_eq!(report(&rep)["schema"], 1);

    let out = run(&["project", "--input", once.to_str().unwrap(), "--output", twice.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let a = read_values(&once);
    let b = read_values(&twice);
    assert_eq!(a.len(), 4 * 64 * 4);
    let peak = a.iter().map(|v| v.0.hypot(v.1)).fold(0.0, f64::max);
    assert!(peak > 0.0);
    let worst = a.iter().zip(&b).map(|(x, y)| (x.0 - y.0).hypot(x.1 - y.1)).fold(0.0, f64::max);
    assert!(worst < 1e-10 * peak, "{worst}");
}

#[test]
fn project_rejects_missing_sidecar_and_duplicates() {
    let dir = tempfile::tempdir().unwrap();
    let bare = dir.path().join("bare.csv");
    fs::write(&bare, "sheet,k,m,re,im\n1,0,0,1,0\n").unwrap();
    let out = run(&["project", "--input", bare.to_str().unwrap(), "--output", dir.path().join("o.csv").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let input = write_input(dir.path());
    let mut text = fs::read_to_string(&input).unwrap();
    text.push_str("1,0,0,1,0\n");
    fs::write(&input, text).unwrap();
    let out = run(&["project", "--input", input.to_str().unwrap(), "--output", dir.path().join("o.csv").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("duplicate"));
}

#[test]
fn sweep_lp_interior_p_is_convergent() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("r.json");
    let out = run(&["sweep-lp", "--beta", "6.283185307", "--p", "2", "--output", rep.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&rep);
    assert_eq!(r["schema"], 1);
    assert_eq!(r["report"]["verdicts"], serde_json::json!(["convergent"]));
    assert!(r["verdicts"].as_array().unwrap().iter().all(|v| v["pass"] == true));
    assert!(r["thresholds"]["lp_upper"].as_f64().unwrap() > 2.0);
    assert!((r["rescale_ln"].as_f64().unwrap() - 4.0 * 6.283185307f64.powi(2)).abs() < 1e-9);
    assert_eq!(r["grid"]["M"], 2);
}

#[test]
fn decay_slopes_at_three_halves_pi() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("r.json");
    let out = run(&["decay", "--beta", "4.712388980", "--no-oracle", "--output", rep.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&rep);
    assert!((r["report"]["infinity"]["exponent"].as_f64().unwrap() + 0.75).abs() < 0.02);
    assert!((r["report"]["zero"]["exponent"].as_f64().unwrap() + 0.25).abs() < 0.02);
}

#[test]
fn sobolev_fraction_is_marginal() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("r.json");
    let out = run(&["sweep-sobolev", "--s", "1/6", "--output", rep.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&rep);
    assert!((r["report"]["points"][0]["s"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-15);
    assert_eq!(r["report"]["verdicts"], serde_json::json!(["marginal"]));
}

#[test]
fn failed_verdict_exits_3_with_failure_list() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("r.json");
    // The fixed-window principal value misses its tolerance by construction.
    let out = run(&["verify-kernels", "--output", rep.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(err["failures"], serde_json::json!(["pv tanh transform"]));
    let r = report(&rep);
    assert_eq!(r["pass"], false);
    assert_eq!(r["failures"], err["failures"]);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["decay", "--beta", "2"]).status.code(), Some(2));
    assert_eq!(run(&["sweep-lp", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["sweep-lp", "--p", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["sweep-sobolev", "--s", "1/0"]).status.code(), Some(2));
    assert_eq!(run(&["sweep-sobolev-lp", "--pairs", "0.1"]).status.code(), Some(2));
    assert_eq!(run(&["isometry", "--n", "4"]).status.code(), Some(2));
    let out = bin().arg("isometry").env("WORMSZEGO_THREADS", "0").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = |p: &Path| vec!["sweep-sobolev-lp".to_string(), "--pairs".into(), "0.1:4".into(), "--output".into(), p.display().to_string()];
    assert_eq!(bin().args(args(&a)).env("WORMSZEGO_THREADS", "1").status().unwrap().code(), Some(0));
    assert_eq!(bin().args(args(&b)).env("WORMSZEGO_THREADS", "3").status().unwrap().code(), Some(0));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn selftest_passes_on_default_grid() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("r.json");
    let out = run(&["selftest", "--beta", "6.283185307", "--output", rep.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&rep);
    assert!(r["verdicts"].as_array().unwrap().len() >= 15);
    assert_eq!(r["failures"], serde_json::json!([]));
}
