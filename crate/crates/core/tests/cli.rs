use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_resfluor")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Data rows of a CSV output, after the comment and header lines.
fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines().skip(2).map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect()
}

fn local_maxima(v: &[f64]) -> usize {
    v.windows(3).filter(|w| w[1] > w[0] && w[1] > w[2]).count()
}

fn validate(text: &str) -> Value {
    let schema: Value =
        serde_json::from_str(include_str!("../docs/output.schema.json")).expect("schema parses");
    let doc: Value = serde_json::from_str(text).expect("output is JSON");
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(&doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
    doc
}

const FIG1: [&str; 6] = ["--gamma", "1e8", "--rabi", "4", "--omega0", "1e15"];

#[test]
fn normalized_spectrum_has_three_peaks() {
    let mut args = vec!["spectrum"];
    args.extend(FIG1);
    args.push("--normalized");
    let csv = stdout(&args);
    let first = csv.lines().next().unwrap();
    assert!(first.starts_with("# resfluor/v1 command=spectrum"));
    for key in ["gamma=", "rabi=", "omega0=", "tau_max=", "tau_steps=", "delta_span=", "delta_steps=", "seed=", "normalized=true"] {
        assert!(first.contains(key), "{key} missing from {first}");
    }
    assert_eq!(csv.lines().nth(1).unwrap(), "delta,S");
    let data = rows(&csv);
    assert_eq!(data.len(), 2001);
    assert_eq!(data[1000][0], 0.0);
    assert_eq!(data[1000][1], 1.0);
    let s: Vec<f64> = data.iter().map(|r| r[1]).collect();
    assert_eq!(local_maxima(&s), 3);
}

#[test]
fn weak_drive_peaks_report() {
    let doc = validate(&stdout(&["peaks", "--gamma", "1e8", "--rabi", "0.5", "--omega0", "1e15"]));
    for which in ["field", "mollow"] {
        assert_eq!(doc["data"][which]["sidebands"].as_array().unwrap().len(), 0);
    }
    // raised for Γ/50 resolution
    assert!(doc["params"]["delta_steps"].as_u64().unwrap() >= 3201);
}

#[test]
fn undriven_correlation_is_exponential() {
    let csv = stdout(&["correlation", "--rabi", "0", "--tau-steps", "400"]);
    for r in rows(&csv) {
        let gt = r[0] * 1e8;
        assert!((r[1] - (-0.5 * gt).exp()).abs() < 1e-10);
    }
}

#[test]
fn outputs_are_byte_identical() {
    for args in [&["sweep", "--points", "50"][..], &["trajectory", "--trajectories", "10", "--duration", "100", "--seed", "9"]] {
        assert_eq!(run(args).stdout, run(args).stdout);
    }
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let path = std::env::temp_dir().join(format!("resfluor-cli-{}.csv", std::process::id()));
    let direct = stdout(&["field", "--position", "1e-6,2e-7,-3e-7"]);
    stdout(&["field", "--position", "1e-6,2e-7,-3e-7", "--out", path.to_str().unwrap()]);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), direct);
    std::fs::remove_file(path).unwrap();
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["spectrum", "--gamma", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["field", "--position", "0,0,0"]).status.code(), Some(2));
    assert_eq!(run(&["field", "--position", "1,2"]).status.code(), Some(2));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    let failed = run(&["spectrum", "--oracle", "--tau-max", "2"]);
    assert_eq!(failed.status.code(), Some(3));
    assert!(failed.stdout.is_empty());
    assert!(!failed.stderr.is_empty());
}

#[test]
fn json_outputs_match_schema() {
    let cases: [&[&str]; 8] = [
        &["spectrum", "--delta-steps", "101"],
        &["mollow", "--oracle", "--delta-steps", "101", "--tau-steps", "800"],
        &["correlation", "--tau-steps", "100"],
        &["peaks"],
        &["sweep", "--points", "20"],
        &["field"],
        &["trajectory", "--trajectories", "10", "--duration", "100"],
        &["audit", "--rabi", "1"],
    ];
    for case in cases {
        let mut args = case.to_vec();
        args.extend(["--format", "json"]);
        let doc = validate(&stdout(&args));
        assert_eq!(doc["command"], case[0]);
    }
}

#[test]
fn schema_rejects_malformed_documents() {
    let schema: Value = serde_json::from_str(include_str!("../docs/output.schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let mut doc: Value = serde_json::from_str(&stdout(&["peaks", "--format", "json"])).unwrap();
    assert!(validator.is_valid(&doc));
    doc["data"]["field"].as_object_mut().unwrap().remove("central");
    assert!(!validator.is_valid(&doc));
    doc["schema"] = "resfluor/v0".into();
    assert!(!validator.is_valid(&doc));
}
