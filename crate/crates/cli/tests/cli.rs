use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cat0lab"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing");
    v
}

#[test]
fn tree_drift_run_writes_report_and_series() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&["run", config("t4-drift.json").to_str().unwrap(), "--outdir", out.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = out.path().join("drift-1");
    let r = report(&dir);
    assert_eq!(r["schema"], "cat0lab.report/1");
    assert_eq!(r["config"]["schema"], "cat0lab.config/1");
    assert!((r["result"]["lambda_hat"].as_f64().unwrap() - 0.5).abs() <= 0.02);
    assert_eq!(r["hypotheses"]["rank_one"]["verdict"], "certified-non-elementary");
    assert!(r["timing"]["wall_clock_seconds"].is_number());
    let csv = fs::read_to_string(dir.join("series.csv")).unwrap();
    assert!(csv.starts_with("path,terminal_speed\n"));
    assert_eq!(csv.lines().count(), 501);
}

#[test]
fn malformed_config_is_a_config_error_without_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, "{\"schema\": ").unwrap();
    let outdir = tmp.path().join("out");
    let o = run(&["run", bad.to_str().unwrap(), "--outdir", outdir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let diag: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(diag["status"], "config-error");
    assert!(!outdir.exists());

    let missing = run(&["run", tmp.path().join("nope.json").to_str().unwrap(), "--outdir", outdir.to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(!outdir.exists());
}

#[test]
fn uncertified_walks_are_refused_unless_allowed() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c: Value = serde_json::from_str(&fs::read_to_string(config("t4-drift.json")).unwrap()).unwrap();
    c["distribution"]["atoms"] = serde_json::json!([{ "isometry": { "model": "T4", "payload": "a" }, "p": 1.0 }]);
    c["n"] = 20.into();
    c["m_samples"] = 3.into();
    let path = tmp.path().join("one-atom.json");
    fs::write(&path, c.to_string()).unwrap();
    let outdir = tmp.path().join("out");
    let o = run(&["run", path.to_str().unwrap(), "--outdir", outdir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!outdir.exists());
    let o = run(&["run", path.to_str().unwrap(), "--outdir", outdir.to_str().unwrap(), "--allow-uncertified"]);
    assert!(o.status.success());
    let r = report(&outdir.join("drift-1"));
    assert_eq!(r["hypotheses_hold"], false);
    assert_eq!(r["result"]["lambda_hat"], 1.0);
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["h2-converge.json", "h2-dirac.json", "t4-stationarity.json"] {
        let mut reports = Vec::new();
        for threads in ["1", "4"] {
            let outdir = tmp.path().join(format!("{name}-{threads}"));
            let o = run(&[
                "run",
                config(name).to_str().unwrap(),
                "--outdir",
                outdir.to_str().unwrap(),
                "--threads",
                threads,
            ]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            let dir = fs::read_dir(&outdir).unwrap().next().unwrap().unwrap().path();
            reports.push((without_timing(report(&dir)), fs::read(dir.join("series.csv")).unwrap()));
        }
        assert_eq!(reports[0], reports[1], "{name}");
    }
}

#[test]
fn sweep_runs_every_match_and_reports_failures() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["h2-rankone-audit.json", "h2xr-tits-table.json"] {
        fs::copy(config(name), tmp.path().join(name)).unwrap();
    }
    fs::write(tmp.path().join("broken.json"), "[]").unwrap();
    let outdir = tmp.path().join("out");
    let pattern = format!("{}/*.json", tmp.path().display());
    let o = run(&["sweep", &pattern, "--outdir", outdir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 2);
    assert!(outdir.join("rankone-audit-1/report.json").exists());
    let tits = report(&outdir.join("tits-table-1"));
    assert_eq!(tits["result"]["tits_ball_trivial"], false);
    assert_eq!(tits["hypotheses"]["rank_one"]["verdict"], "hypotheses-violated");

    let none = run(&["sweep", &format!("{}/*.nothing", tmp.path().display())]);
    assert_eq!(none.status.code(), Some(2));
}

#[test]
fn oracles() {
    let o = run(&["oracle", "tree-drift", "--n", "2"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["expected_distance"], 1.5);
    assert_eq!(v["limit"], 0.5);

    let o = run(&[
        "oracle",
        "busemann-limit",
        "--xi",
        r#"{"model":"E2","coord":0.0}"#,
        "--x",
        r#"{"model":"E2","coords":[0,0]}"#,
        "--z",
        r#"{"model":"E2","coords":[3,4]}"#,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() + 3.0).abs() < 1e-3);

    let bad = run(&["oracle", "busemann-limit", "--xi", "7", "--x", "0", "--z", "0"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn every_shipped_config_parses() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        let text = fs::read_to_string(&p).unwrap();
        cat0lab_core::experiment::ExperimentConfig::from_json(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        n += 1;
    }
    assert_eq!(n, 15);
}
