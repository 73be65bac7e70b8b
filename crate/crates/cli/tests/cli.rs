use std::process::Command as Process;

use qwild_cli::emit::flatten_values;
use qwild_cli::{run_captured, EXIT_OK, EXIT_RUNTIME, EXIT_STRICT, EXIT_USAGE};
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let (code, out, err) = run_captured(std::iter::once("qwild").chain(args.iter().copied()));
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json_doc(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, EXIT_OK, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn gram_brute_check_agrees() {
    let doc = json_doc(&["gram", "--n", "12", "--k", "9", "--brute-check"]);
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["command"], "gram");
    let r = &doc["records"][0];
    let (d, p) = (r["D_direct"].as_f64().unwrap(), r["D_plancherel"].as_f64().unwrap());
    assert!((d - p).abs() <= 1e-9 * d);
    assert_eq!(r["brute_agrees"], true);
    for key in ["n", "k", "lambda", "sqrtG", "P", "p_success"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn adversary_at_four_is_two() {
    let doc = json_doc(&["adversary", "--n", "4"]);
    assert_eq!(doc["records"][0]["bound"], 2.0);
    assert_eq!(doc["summary"]["bounds"][0]["bound"], 2.0);
    assert!(doc["records"][0].get("argmin_witness").is_some());
}

#[test]
fn single_one_costs_one_query() {
    let doc = json_doc(&["cgt", "--n", "1000", "--k", "1", "--trials", "100", "--seed", "7"]);
    assert_eq!(doc["summary"]["by_case"][0]["queries"]["mean"], 1.0);
    assert_eq!(doc["summary"]["by_case"][0]["exact_fraction"], 1.0);
    assert_eq!(doc["records"].as_array().unwrap().len(), 100);
    assert_eq!(doc["config"]["seed"], 7);
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["bogus"][..],
        &["gram", "--n", "5", "--wat"],
        &["gram"],
        &["gram", "--n", "5", "--n-min", "1", "--n-max", "4"],
        &["dk-sweep", "--n-min", "9", "--n-max", "4"],
        &["sww", "--n", "64", "--trials", "0"],
        &["cgt", "--n", "100"],
        &["cgt", "--n", "100", "--k", "2", "--weight", "3"],
        &["gram", "--n", "30", "--brute-check"],
        &["gram", "--n", "5", "--budget", "-1"],
        &["adversary", "--n", "11"],
        &["reduce", "--k", "17"],
        &["reduce", "--k", "0"],
        &["all-acceptance", "--only", "99"],
        &["gram", "--n", "5", "--format", "xml"],
    ] {
        let (code, out, err) = run(args);
        assert_eq!(code, EXIT_USAGE, "{args:?}: {err}");
        assert!(out.is_empty(), "{args:?} wrote {out}");
        assert!(!err.is_empty());
    }
}

#[test]
fn help_succeeds() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("dk-sweep") && out.contains("all-acceptance"));
    assert!(!out.contains('\u{1b}'));
}

#[test]
fn alarms_fail_only_under_strict() {
    let (code, out, err) = run(&["gram", "--n", "6", "--budget", "0"]);
    assert_eq!(code, EXIT_OK);
    assert!(err.contains("warning:"));
    assert!(
        serde_json::from_str::<Value>(&out).unwrap()["summary"]["alarms"]
            .as_u64()
            .unwrap()
            > 0
    );

    let (code, out, err) = run(&["gram", "--n", "6", "--budget", "0", "--strict"]);
    assert_eq!(code, EXIT_STRICT);
    assert!(!out.is_empty(), "the document is still written");
    assert!(err.contains("--strict"));

    let (code, _, err) = run(&["gram", "--n", "6", "--strict"]);
    assert_eq!(code, EXIT_OK);
    assert!(!err.contains("warning:"));
}

#[test]
fn empty_results_create_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let p = path.to_str().unwrap();
    let (code, out, err) = run(&["dk-sweep", "--n", "5", "--k", "9", "--out", p]);
    assert_eq!(code, EXIT_RUNTIME, "{err}");
    assert!(out.is_empty());
    assert!(!path.exists());
}

#[test]
fn unwritable_path_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("missing").join("out.json");
    let (code, _, err) = run(&["adversary", "--n", "3", "--out", p.to_str().unwrap()]);
    assert_eq!(code, EXIT_RUNTIME);
    assert!(err.contains("cannot write"));
}

#[test]
fn out_file_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sww.csv");
    let p = path.to_str().unwrap();
    let args = [
        "sww", "--n", "100", "--trials", "20", "--seed", "9", "--format", "csv", "--out", p,
    ];
    let (code, out, _) = run(&args);
    assert_eq!(code, EXIT_OK);
    assert!(
        out.starts_with("sww: ") && out.lines().count() == 1,
        "summary line on stdout: {out}"
    );
    let first = std::fs::read(&path).unwrap();
    run(&args);
    assert_eq!(first, std::fs::read(&path).unwrap());
    let (_, other, _) = run(&["sww", "--n", "100", "--trials", "20", "--seed", "10", "--format", "csv"]);
    assert_ne!(first, other.into_bytes());
}

#[test]
fn earlier_trials_survive_more_trials() {
    let few = json_doc(&["cgt", "--n", "300", "--k", "6", "--trials", "5", "--seed", "4"]);
    let many = json_doc(&["cgt", "--n", "300", "--k", "6", "--trials", "12", "--seed", "4"]);
    assert_eq!(
        few["records"].as_array().unwrap()[..],
        many["records"].as_array().unwrap()[..5]
    );
}

/// Compares a CSV cell with the JSON leaf it came from, by the leaf's type.
fn cell_matches(cell: &str, leaf: &Value) -> bool {
    match leaf {
        Value::Null => cell.is_empty(),
        Value::Bool(b) => cell.parse::<bool>().ok() == Some(*b),
        Value::Number(n) => cell.parse::<f64>().ok() == n.as_f64(),
        Value::String(s) => cell == s,
        Value::Array(_) | Value::Object(_) => serde_json::from_str::<Value>(cell).ok().as_ref() == Some(leaf),
    }
}

fn assert_round_trip(args: &[&str]) {
    let doc = json_doc(args);
    let mut csv_args = args.to_vec();
    csv_args.extend(["--format", "csv"]);
    let (code, text, err) = run(&csv_args);
    assert_eq!(code, EXIT_OK, "{err}");

    let header_line = text.lines().next().unwrap();
    let header: Value = serde_json::from_str(header_line.strip_prefix("# ").unwrap()).unwrap();
    let mut expected_config = doc["config"].clone();
    expected_config["format"] = "csv".into();
    assert_eq!(header["config"], expected_config);
    assert_eq!(header["schema"], doc["schema"]);

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let columns: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let records = doc["records"].as_array().unwrap();
    assert_eq!(rows.len(), records.len());
    for (row, rec) in rows.iter().zip(records) {
        let leaves = flatten_values(rec);
        assert_eq!(leaves.len(), columns.len());
        for (col, cell) in columns.iter().zip(row.iter()) {
            let leaf = &leaves[col];
            assert!(cell_matches(cell, leaf), "{args:?} column {col}: {cell:?} vs {leaf}");
        }
    }
}

#[test]
fn csv_and_json_agree() {
    assert_round_trip(&["gram", "--n", "9"]);
    assert_round_trip(&["dk-sweep", "--n-min", "1", "--n-max", "40"]);
    assert_round_trip(&["sww", "--n", "50", "--trials", "4", "--seed", "2", "--trace"]);
    assert_round_trip(&["cgt", "--n", "200", "--k", "1,5", "--trials", "6", "--trace"]);
    assert_round_trip(&["cgt-classical", "--n", "200", "--k", "5", "--trials", "6"]);
    assert_round_trip(&["adversary", "--n", "2,3"]);
    assert_round_trip(&["reduce", "--k", "4", "--padding", "2"]);
}

#[test]
fn config_file_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"n": [30, 40], "trials": 3, "seed": 11, "trace": true}"#).unwrap();
    let cfg = path.to_str().unwrap();

    let doc = json_doc(&["sww", "--config", cfg]);
    assert_eq!(doc["config"]["n"], serde_json::json!([30, 40]));
    assert_eq!(doc["config"]["trials"], 3);
    assert_eq!(doc["config"]["seed"], 11);
    assert_eq!(doc["config"]["trace"], true);
    assert_eq!(doc["records"].as_array().unwrap().len(), 6);

    let doc = json_doc(&["sww", "--config", cfg, "--seed", "12", "--n-min", "20", "--n-max", "21"]);
    assert_eq!(doc["config"]["seed"], 12);
    assert_eq!(doc["config"]["n"], serde_json::json!([20, 21]));
    assert_eq!(doc["config"]["trials"], 3);

    std::fs::write(&path, r#"{"n": 30, "k": 2}"#).unwrap();
    let (code, _, err) = run(&["sww", "--config", cfg]);
    assert_eq!(code, EXIT_USAGE, "k is not an sww flag: {err}");
    std::fs::write(&path, "not json").unwrap();
    assert_eq!(run(&["sww", "--config", cfg]).0, EXIT_USAGE);
}

#[test]
fn acceptance_subcommand_reports_criteria() {
    let doc = json_doc(&["all-acceptance", "--only", "10"]);
    assert_eq!(doc["records"][0]["id"], 10);
    assert_eq!(doc["records"][0]["passed"], true);
    assert_eq!(doc["summary"]["passed"], 1);
}

#[test]
fn binary_exit_statuses() {
    let bin = env!("CARGO_BIN_EXE_qwild");
    let status = |args: &[&str]| Process::new(bin).args(args).output().unwrap();
    let ok = status(&["adversary", "--n", "4"]);
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    let v: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["records"][0]["bound"], 2.0);
    assert_eq!(status(&["nope"]).status.code(), Some(EXIT_USAGE));
    assert_eq!(
        status(&["gram", "--n", "4", "--budget", "0", "--strict"]).status.code(),
        Some(EXIT_STRICT)
    );
    assert_eq!(
        status(&["dk-sweep", "--n", "3", "--k", "5"]).status.code(),
        Some(EXIT_RUNTIME)
    );
}
