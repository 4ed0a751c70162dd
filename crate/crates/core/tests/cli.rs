use std::path::PathBuf;

use gfe::cli::run_with;
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("gfe").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn schema_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

fn schema_errors(schema: &str, doc: &Value) -> Vec<String> {
    let s: Value = serde_json::from_str(&std::fs::read_to_string(schema_dir().join(schema)).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&s).expect("schema compiles");
    let msgs = match compiled.validate(doc) {
        Ok(()) => Vec::new(),
        Err(errors) => errors.map(|e| format!("{e} at {}", e.instance_path)).collect(),
    };
    msgs
}

fn validate(schema: &str, doc: &Value) {
    let msgs = schema_errors(schema, doc);
    assert!(msgs.is_empty(), "{schema}: {msgs:#?}");
}

fn json_run(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let (code, out, _) = run(&full);
    (code, serde_json::from_str(out.trim()).expect("one JSON document"))
}

#[test]
fn solve_examples() {
    let (code, v) = json_run(&["solve", "29", "19", "--n", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["status"], "solvable");
    let w: Vec<i128> = v["result"]["witness"].as_array().unwrap().iter().map(|s| s.as_str().unwrap().parse().unwrap()).collect();
    let known = [[7, 4, 3], [22, 1, 3], [8, 47, 15]];
    assert!(known.iter().any(|k| k[0] == w[0].abs() && k[1] == w[1].abs() && k[2] == w[2]), "{w:?}");

    let (code, out, _) = run(&["solve", "29", "3", "--n", "3"]);
    assert_eq!(code, 0);
    assert!(out.contains("unsolvable"));

    let (code, v) = json_run(&["solve", "60507", "69", "--n", "3"]);
    assert_eq!(code, 2);
    assert_eq!(v["result"]["status"], "undecided");
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        vec!["solve", "0", "3"],
        vec!["solve", "29", "0"],
        vec!["solve", "29", "3", "--n", "4"],
        vec!["solve", "29x", "3"],
        vec!["solve", "29", "3", "--bogus"],
        vec!["frobnicate"],
        vec!["classgroup", "-5"],
        vec!["stats", "sweep", "--T", "20000", "--mode", "global"],
        vec!["stats", "constants", "--X", "10"],
    ] {
        let (code, _, err) = run(&args);
        assert_eq!(code, 1, "{args:?}");
        assert!(!err.is_empty(), "{args:?}");
    }
    let (_, _, err) = run(&["solve", "29", "3", "--n", "4"]);
    assert!(err.contains("odd"));
    let (_, _, err) = run(&["solve", "0", "3"]);
    assert!(err.contains("B must be nonzero"));
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("solve"));
}

#[test]
fn negative_coefficients_parse() {
    let (code, v) = json_run(&["solve", "-4", "7"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["witness"], serde_json::json!(["2", "1", "0"]));
    let (code, v) = json_run(&["classgroup", "-1356"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["elementary_divisors"], serde_json::json!(["3", "6"]));
}

#[test]
fn outputs_match_schemas() {
    let cases: Vec<(&str, Vec<&str>)> = vec![
        ("solve", vec!["solve", "29", "19"]),
        ("solve", vec!["solve", "29", "3"]),
        ("solve", vec!["solve", "1", "3"]),
        ("solve", vec!["solve", "60507", "69"]),
        ("solve", vec!["solve", "6723", "69", "--trace"]),
        ("solve", vec!["solve", "243", "93", "--trace", "--bound", "20", "--ymax", "200"]),
        ("solve", vec!["solve", "-4", "7"]),
        ("local", vec!["local", "29", "3"]),
        ("local", vec!["local", "1", "3"]),
        ("global", vec!["global", "29", "19"]),
        ("global", vec!["global", "83", "207"]),
        ("global", vec!["global", "3", "124", "--tilde"]),
        ("oracle", vec!["oracle", "29", "19", "--zmax", "15"]),
        ("oracle", vec!["oracle", "6723", "23", "--zmax", "12", "--filter", "y:3"]),
        ("classgroup", vec!["classgroup", "-339"]),
        ("classgroup", vec!["classgroup", "8"]),
        ("stats-sweep", vec!["stats", "sweep", "--T", "12"]),
        ("stats-sweep", vec!["stats", "sweep", "--T", "12", "--mode", "global"]),
        ("stats-constants", vec!["stats", "constants", "--X", "500"]),
    ];
    for (schema, args) in cases {
        let (_, v) = json_run(&args);
        validate(&format!("{schema}.schema.json"), &v);
    }
    let (code, v) = json_run(&["solve", "0", "3"]);
    assert_eq!(code, 1);
    validate("error.schema.json", &v);

    // the schemas do reject malformed payloads
    let (_, mut v) = json_run(&["solve", "29", "19"]);
    v["result"]["witness"] = serde_json::json!([22, 1, 3]);
    assert!(!schema_errors("solve.schema.json", &v).is_empty());
    let (_, mut v) = json_run(&["classgroup", "-339"]);
    v["result"]["extra"] = Value::Bool(true);
    assert!(!schema_errors("classgroup.schema.json", &v).is_empty());
}

#[test]
fn reruns_are_identical() {
    for args in [vec!["solve", "6723", "69", "--trace"], vec!["global", "339", "29"], vec!["oracle", "29", "19", "--zmax", "20"]] {
        let (_, a) = json_run(&args);
        let (_, b) = json_run(&args);
        assert_eq!(a["result"].to_string(), b["result"].to_string());
    }
}

#[test]
fn oracle_lines() {
    let (code, out, _) = run(&["--json", "oracle", "29", "19", "--zmax", "15", "--lines"]);
    assert_eq!(code, 0);
    let hits: Vec<Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(hits.contains(&serde_json::json!(["7", "4", "3"])));
    let (_, out, _) = run(&["oracle", "29", "3", "--zmax", "50"]);
    assert!(out.contains(": 0 primitive"));
}

#[test]
fn sweep_csv() {
    let path = std::env::temp_dir().join(format!("gfe_sweep_{}.csv", std::process::id()));
    let p = path.to_str().unwrap();
    let (code, _, _) = run(&["stats", "sweep", "--n", "3", "--T", "8", "--mode", "global", "--out", p]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("B,C,local,verdict,witness"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 14 * 14);
    for r in rows {
        let f: Vec<&str> = r.split(',').collect();
        assert_eq!(f.len(), 5);
        f[0].parse::<i64>().unwrap();
        f[1].parse::<i64>().unwrap();
        assert!(["true", "false"].contains(&f[2]));
        assert!(["solvable", "unsolvable", "undecided"].contains(&f[3]));
    }
}
