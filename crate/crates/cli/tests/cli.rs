use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn ptensor(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptensor"))
        .args(args)
        .current_dir(dir)
        .env_remove("PTENSOR_SEED")
        .output()
        .expect("spawn ptensor")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn gen(dir: &Path, name: &str, args: &[&str]) {
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", name]);
    let o = ptensor(&full, dir);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn analyze_identity() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "id.json", &["identity", "--m", "3", "--n", "3"]);
    let o = ptensor(&["analyze", "id.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert_eq!(r["p"]["verdict"], "CERTIFIED");
    assert_eq!(r["p0"]["verdict"], "CERTIFIED");
    assert_eq!(r["s"]["verdict"], "CERTIFIED");
    let classes = r["classes"].as_array().unwrap();
    let sdd = classes.iter().find(|c| c["class"] == "strictly_diagonally_dominant").unwrap();
    assert_eq!(sdd["verdict"], "CERTIFIED");
    assert_eq!(r["h_tensor"]["report"]["class"], "nonsingular_h_tensor");
    assert_eq!(r["h_tensor"]["report"]["verdict"], "CERTIFIED");
}

#[test]
fn malformed_json_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.json", "{ not json");
    for args in [vec!["analyze", "bad.json"], vec!["pcheck", "bad.json", "p"], vec!["tcp", "bad.json"]] {
        let o = ptensor(&args, dir.path());
        assert_eq!(o.status.code(), Some(3), "{args:?}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    }
    let o = ptensor(&["analyze", "missing.json"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    write(dir.path(), "short.json", r#"{"order": 2, "dim": 2, "layout": "dense", "symmetric": false, "entries": [1.0]}"#);
    assert_eq!(ptensor(&["analyze", "short.json"], dir.path()).status.code(), Some(3));
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(ptensor(&[], dir.path()).status.code(), Some(2));
    assert_eq!(ptensor(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(ptensor(&["gen", "cauchy", "--m", "3"], dir.path()).status.code(), Some(2));
    assert_eq!(ptensor(&["gen", "identity", "--m", "0", "--n", "2"], dir.path()).status.code(), Some(2));
    assert_eq!(ptensor(&["gen", "basis-p0", "--indices", "0,5", "--n", "2"], dir.path()).status.code(), Some(2));
    gen(dir.path(), "id.json", &["identity", "--m", "2", "--n", "2"]);
    assert_eq!(ptensor(&["pcheck", "id.json", "q"], dir.path()).status.code(), Some(2));
    assert_eq!(ptensor(&["pcheck", "id.json", "p", "--starts", "0"], dir.path()).status.code(), Some(2));
}

#[test]
fn pcheck_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "neg.json",
        r#"{"order": 4, "dim": 2, "layout": "coo", "symmetric": false,
            "entries": [[0, 0, 0, 0, -1.0], [1, 1, 1, 1, -1.0]]}"#,
    );
    let r = json(&ptensor(&["pcheck", "neg.json", "p"], dir.path()));
    assert_eq!(r["verdict"], "REFUTED");
    assert_eq!(r["witness"], serde_json::json!([1.0, 0.0]));

    gen(dir.path(), "id.json", &["identity", "--m", "3", "--n", "2"]);
    let r = json(&ptensor(&["pcheck", "id.json", "s"], dir.path()));
    assert_eq!(r["verdict"], "CERTIFIED");
    assert_eq!(r["witness"], serde_json::json!([1.0, 1.0]));

    let o = ptensor(&["repro", "--json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = ptensor::io::tensor_to_json(&ptensor::examples::dnn_counterexample(), ptensor::io::Layout::Coo).unwrap();
    write(dir.path(), "example.json", &v.to_string());
    let r = json(&ptensor(&["pcheck", "example.json", "p0"], dir.path()));
    assert_eq!(r["verdict"], "REFUTED");
    assert!(r["witness_value"].as_f64().unwrap() < 0.0);
    let r = json(&ptensor(&["pcheck", "example.json", "p"], dir.path()));
    assert_eq!(r["verdict"], "REFUTED");
}

#[test]
fn tcp_instances() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "id.json", &["identity", "--m", "2", "--n", "2"]);
    write(dir.path(), "neg.json", r#"{"tensor": "id.json", "q": [-1.0, -1.0]}"#);
    let r = json(&ptensor(&["tcp", "neg.json"], dir.path()));
    assert_eq!(r["status"], "solved");
    for v in r["x"].as_array().unwrap() {
        assert!((v.as_f64().unwrap() - 1.0).abs() < 1e-9);
    }

    write(dir.path(), "pos.json", r#"{"tensor": "id.json", "q": [0.5, 2.0]}"#);
    let r = json(&ptensor(&["tcp", "pos.json"], dir.path()));
    assert_eq!(r["status"], "solved");
    assert_eq!(r["x"], serde_json::json!([0.0, 0.0]));

    // F(x) = -x^2 - 1 is negative everywhere.
    write(
        dir.path(),
        "none.json",
        r#"{"tensor": {"order": 2, "dim": 1, "layout": "dense", "symmetric": true, "entries": [-1.0]},
            "q": [-1.0]}"#,
    );
    let o = ptensor(&["tcp", "none.json", "--starts", "4", "--iters", "50"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["status"], "no_solution_found");

    let o = ptensor(&["tcp", "neg.json", "--explore"], dir.path());
    let r = json(&o);
    assert_eq!(r["solutions"].as_array().unwrap().len(), 1);
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "id.json", &["identity", "--m", "2", "--n", "2"]);
    let o = ptensor(&["pcheck", "id.json", "p", "--out", "report.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let r: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(r["verdict"], "CERTIFIED");
}

#[test]
fn repro_text_and_negative_control() {
    let dir = tempfile::tempdir().unwrap();
    let o = ptensor(&["repro"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("PASS"));

    let t = ptensor::examples::dnn_counterexample();
    let broken = t.with_entry(&[1, 1, 2], t.get(&[1, 1, 2]).unwrap() + 1.0).unwrap().symmetrize();
    let v = ptensor::io::tensor_to_json(&broken, ptensor::io::Layout::Dense).unwrap();
    write(dir.path(), "broken.json", &v.to_string());
    let o = ptensor(&["repro", "--tensor", "broken.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}
