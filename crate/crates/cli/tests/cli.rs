use std::process::{Command, Output};

use serde_json::Value;

fn nlscd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlscd")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn envelope_is_shared_across_verbs() {
    for args in [
        vec!["spectrum", "--nu", "-1", "--alpha", "0"],
        vec!["verify", "--only", "theta_props"],
    ] {
        let out = nlscd(&args);
        assert!(out.status.success(), "{}", stderr(&out));
        let v = json(&out);
        for key in ["verb", "params", "results", "diagnostics", "citations"] {
            assert!(v.get(key).is_some(), "{args:?} lacks {key}");
        }
    }
}

#[test]
fn spectrum_reports_the_ladder() {
    let v = json(&nlscd(&["spectrum", "--nu", "-1", "--alpha", "0", "--count", "4"]));
    let r = &v["results"];
    assert_eq!(r["ladder"].as_array().unwrap().len(), 4);
    let omega_nu = r["omega_nu"].as_f64().unwrap();
    assert!((omega_nu - 10.398390228).abs() < 1e-6);
    assert_eq!(r["friedrichs"][0].as_f64().unwrap(), -1.0);
}

#[test]
fn groundstate_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let j = dir.path().join("gs.json");
    let c = dir.path().join("gs.csv");
    let out = nlscd(&[
        "groundstate", "--nu", "-1", "--alpha", "0", "--p", "3", "--mu", "1", "--nodes", "800",
        "--json", j.to_str().unwrap(), "--csv", c.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&j).unwrap()).unwrap();
    assert_eq!(v["verb"], "groundstate");
    assert!(v["results"]["energy"].as_f64().unwrap() < v["results"]["charge_free_energy"].as_f64().unwrap());
    assert_eq!(v["diagnostics"]["converged"], true);
    let csv = std::fs::read_to_string(&c).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,phi,green,u"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 4);
    assert!(first[0].contains('e') && first[0].split('e').next().unwrap().len() == 18);
}

#[test]
fn hypothesis_violations_exit_one() {
    let out = nlscd(&["actionmin", "--nu", "-1", "--alpha", "0", "--p", "3", "--omega", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("ω > ω_ν"));
    let out = nlscd(&["groundstate", "--nu", "-1", "--alpha", "0", "--p", "4", "--mu", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("2 < p < 4"));
    let out = nlscd(&["groundstate", "--nu", "1", "--alpha", "0", "--p", "3", "--mu", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    let out = nlscd(&["groundstate", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("Usage"));
    let out = nlscd(&["groundstate", "--nu", "-1", "--alpha", "0", "--p", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--mu"));
    let out = nlscd(&["verify", "--only", "nonsense"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_thread_count_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_nlscd"))
        .args(["spectrum", "--nu", "-1", "--alpha", "0"])
        .env("NLSCD_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"nu": -1.0, "alpha": 0.5, "count": 3}"#).unwrap();
    let v = json(&nlscd(&["spectrum", "--config", cfg.to_str().unwrap()]));
    assert_eq!(v["params"]["alpha"], 0.5);
    assert_eq!(v["results"]["ladder"].as_array().unwrap().len(), 3);
    let v = json(&nlscd(&["spectrum", "--config", cfg.to_str().unwrap(), "--alpha", "0"]));
    assert_eq!(v["params"]["alpha"], 0.0);
    std::fs::write(&cfg, r#"{"nu": -1.0, "colour": 3}"#).unwrap();
    assert_eq!(nlscd(&["spectrum", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn kernel_dump_emits_table() {
    let out = nlscd(&["kernel-dump", "--nu", "-1", "--lambda", "4", "--nodes", "400"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,G,Phi,F"));
    assert!(lines.count() >= 400);
}

#[test]
fn verify_reports_failures_through_exit_status() {
    let out = nlscd(&["verify", "--only", "rearrangement", "--samples", "5", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["results"]["all_pass"], true);
    assert_eq!(v["params"]["seed"], 7);
    assert!(stderr(&out).contains("PASS rearrangement"));
}
