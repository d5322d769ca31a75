use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn corpus(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances");
    root.join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_latticekit")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).expect("report is JSON")
}

#[test]
fn svp_on_z2_has_norm_one() {
    let (code, out, _) = run(&["svp", "--instance", &corpus("z2.json"), "--norm", "l2"]);
    assert_eq!(code, 0);
    let r = json(&out);
    assert_eq!(r["result"]["norm"]["value"], "1");
    assert_eq!(r["config"]["norm"], "l2");
}

#[test]
fn theta_three_on_z2_is_no() {
    let (code, out, _) = run(&["theta", "--instance", &corpus("z2.json"), "--k", "3", "--p", "2", "--seed", "7"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["result"]["answer"], "NO");
}

#[test]
fn missing_instance_is_a_usage_error() {
    let (code, out, err) = run(&["sap", "--instance", "missing.json"]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("missing.json"), "{err}");
}

#[test]
fn malformed_instance_reports_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\n  \"dimension\": 2,\n  \"basis\": [[\"1\", \"x\"]]\n}\n").unwrap();
    let (code, _, err) = run(&["svp", "--instance", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("line 3") && err.contains("column"), "{err}");
}

#[test]
fn bad_flags_exit_one() {
    assert_eq!(run(&["svp", "--instance", &corpus("z2.json"), "--bogus"]).0, 1);
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(run(&["sap", "--instance", &corpus("z2.json")]).0, 1);
    assert_eq!(run(&["svp", "--instance", &corpus("z2.json"), "--norm", "l0"]).0, 1);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn solver_outcomes_exit_two() {
    let (code, out, _) = run(&["psap", "--instance", &corpus("inside.json")]);
    assert_eq!(code, 2);
    assert_eq!(json(&out)["error"]["kind"], "infeasible");
    // A rank-deficient lattice is a usage error for the sieve.
    assert_eq!(run(&["sap", "--instance", &corpus("inside.json")]).0, 1);
}

#[test]
fn oracle_flag_agrees() {
    for args in [
        vec!["sap", "--instance", "sap3.json"],
        vec!["minima", "--instance", "skew3.json"],
        vec!["pcvp", "--instance", "pcvp3.json"],
        vec!["promise-cvp", "--instance", "promise3.json"],
        vec!["cap", "--instance", "z2.json", "--radius", "3/2", "--epsilon", "1/4"],
    ] {
        let mut a: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        a[2] = corpus(args[2]);
        a.push("--oracle".into());
        let refs: Vec<&str> = a.iter().map(String::as_str).collect();
        let (code, out, err) = run(&refs);
        assert_eq!(code, 0, "{args:?}: {err}");
        assert_eq!(json(&out)["oracle"]["agrees"], true, "{args:?}");
    }
}

#[test]
fn perfect_code_generator() {
    for (graph, answer) in [("k3.txt", "YES"), ("c4.txt", "NO"), ("star3.txt", "YES")] {
        let (code, out, _) = run(&["gen-perfect-code", "--graph", &corpus(graph), "--k", "1", "--decide", "--oracle"]);
        assert_eq!(code, 0);
        let r = json(&out);
        assert_eq!(r["result"]["answer"], answer, "{graph}");
        assert_eq!(r["oracle"]["agrees"], true);
        assert_eq!(r["result"]["instance"]["dimension"], r["result"]["instance"]["basis"][0].as_array().unwrap().len());
    }
}

#[test]
fn same_seed_same_bytes_across_threads() {
    let args = ["sap", "--instance", &corpus("sap3.json"), "--seed", "11"];
    let one = run(&[&args[..], &["--threads", "1"]].concat());
    let four = run(&[&args[..], &["--threads", "4"]].concat());
    assert_eq!(one.0, 0);
    assert_eq!(one, four);
    let other_seed = run(&["sap", "--instance", &corpus("sap3.json"), "--seed", "12"]);
    assert_ne!(json(&one.1)["result"]["stats"], json(&other_seed.1)["result"]["stats"]);
}
