use std::process::{Command, Output};

use clap::Parser;
use serde_json::Value;
use telegate_cli::{execute, Cli};

fn report(args: &[&str]) -> Value {
    let mut full = vec!["telegate"];
    full.extend_from_slice(args);
    let cli = Cli::try_parse_from(full).unwrap();
    let ex = execute(&cli, None).unwrap();
    assert_eq!(ex.exit_code, 0, "{args:?}");
    serde_json::from_str(&ex.report).unwrap()
}

fn bin(args: &[&str], env_seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_telegate"));
    cmd.args(args).env_remove("TELEGATE_SEED");
    if let Some(s) = env_seed {
        cmd.env("TELEGATE_SEED", s);
    }
    cmd.output().unwrap()
}

#[test]
fn ideal_truth_table_is_perfect() {
    let r = report(&["truth-table", "--ideal", "--shots", "4000"]);
    assert_eq!(r["result"]["table"]["fidelity"], 1.0);
    assert_eq!(r["result"]["max_deviation_from_ideal"], 0.0);
}

#[test]
fn ideal_bell_fidelities_are_one() {
    let r = report(&["bell", "--ideal", "--shots", "300"]);
    let states: Vec<&str> = r["result"].as_array().unwrap().iter().map(|b| b["state"].as_str().unwrap()).collect();
    assert_eq!(states, ["phi_plus", "phi_minus", "psi_plus", "psi_minus"]);
    for b in r["result"].as_array().unwrap() {
        assert_eq!(b["fidelity"], 1.0);
    }
}

#[test]
fn ideal_ipea_reads_101() {
    let r = report(&["ipea", "--u", "Z^5/4", "--rounds", "3", "--ideal"]);
    assert_eq!(r["result"]["bit_string"], "101");
    assert_eq!(r["result"]["phi_estimate_turns"], 0.625);
}

#[test]
fn reports_carry_config_and_seed() {
    let r = report(&["dj", "--seed", "77", "--shots", "100"]);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["command"], "dj");
    assert_eq!(r["seed"], 77);
    assert_eq!(r["config"]["seed"], 77);
    assert_eq!(r["config"]["memory"]["storage_time_us"], 80.315);
}

#[test]
fn binary_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<String> = (0..2).map(|i| dir.path().join(format!("r{i}.json")).display().to_string()).collect();
    for p in &paths {
        let out = bin(&["truth-table", "--shots", "1000", "--out", p], None);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&paths[0]).unwrap(), std::fs::read(&paths[1]).unwrap());
}

#[test]
fn seed_precedence() {
    let env = bin(&["dj", "--shots", "50"], Some("123"));
    let r: Value = serde_json::from_slice(&env.stdout).unwrap();
    assert_eq!(r["seed"], 123);
    let flag = bin(&["dj", "--shots", "50", "--seed", "9"], Some("123"));
    let r: Value = serde_json::from_slice(&flag.stdout).unwrap();
    assert_eq!(r["seed"], 9);
    assert_eq!(bin(&["dj"], Some("abc")).status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.display().to_string()
    };

    let bad = write("bad.json", r#"{"memory": {"storage_time": 70}}"#);
    let out = bin(&["check", "--config", &bad], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("memory.storage_time"));

    let vx = write("vx.json", r#"{"source": {"vz": 0.5, "vx": 0.9}}"#);
    assert_eq!(bin(&["check", "--config", &vx], None).status.code(), Some(2));

    let short = write("short.json", r#"{"memory": {"storage_time_us": 70}}"#);
    let out = bin(&["check", "--config", &short], None);
    assert_eq!(out.status.code(), Some(1));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["result"]["timing"]["storage_ok"], false);

    let empty = write("empty.json", "");
    assert_eq!(bin(&["check", "--config", &empty], None).status.code(), Some(0));

    // the ideal model is far from the measured table
    let out = bin(&["truth-table", "--ideal", "--shots", "400", "--compare-reference"], None);
    assert_eq!(out.status.code(), Some(3));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["comparison"]["pass"], false);

    assert_eq!(bin(&["budget", "--compare-reference"], None).status.code(), Some(2));
    assert_eq!(bin(&["ipea", "--u", "Q"], None).status.code(), Some(2));
    assert_eq!(bin(&["frobnicate"], None).status.code(), Some(2));
}

#[test]
fn csv_tables() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("tt.csv");
    let out = bin(&["truth-table", "--ideal", "--shots", "400", "--csv", csv.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("input,HH,HV,VH,VV"));
    assert_eq!(lines.next(), Some("HH,1,0,0,0"));
    assert_eq!(lines.count(), 3);

    let budget = dir.path().join("b.csv");
    bin(&["budget", "--csv", budget.to_str().unwrap()], None);
    assert!(std::fs::read_to_string(&budget).unwrap().starts_with("stage,role,probability,cumulative\n"));

    assert_eq!(bin(&["throughput", "--csv", budget.to_str().unwrap()], None).status.code(), Some(2));
}

#[test]
fn pulse_synth_report() {
    let r = report(&["pulse", "synth", "--teeth", "16", "--double-pass"]);
    let res = &r["result"];
    assert_eq!(res["metrics"]["tooth_count"], 16);
    assert!(res["double_pass"]["round_trip_deviation"].as_f64().unwrap() < 1e-9);
    assert!(res["double_pass"]["max_phase_jump_rad"].as_f64().unwrap() < std::f64::consts::FRAC_PI_2);
}

#[test]
fn trials_stream_is_ndjson() {
    let cli = Cli::try_parse_from(["telegate", "trials", "--ideal", "--shots", "20"]).unwrap();
    let ex = execute(&cli, None).unwrap();
    let lines: Vec<Value> = ex.report.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 21);
    assert_eq!(lines[0]["command"], "trials");
    assert_eq!(lines[0]["result"]["totals"]["shots"], 20);
    assert_eq!(lines[5]["trial_id"], 4);
}

#[test]
fn throughput_matches_reference_rate() {
    let r = report(&["throughput"]);
    let rate = r["result"]["rate_hz"].as_f64().unwrap();
    assert!((rate - 0.042).abs() < 1e-12);
    let ten = report(&["throughput", "--modes", "10"]);
    let rate10 = ten["result"]["rate_hz"].as_f64().unwrap();
    assert!((rate10 / 10.0 - rate / 1097.0).abs() < 1e-15);
}
