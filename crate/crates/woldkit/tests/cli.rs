use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn woldkit(args: &[&str], dir: &Path) -> (i32, Value, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_woldkit")).args(args).current_dir(dir).output().expect("binary runs");
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().expect("exit code"), report, String::from_utf8_lossy(&out.stderr).into_owned())
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

#[test]
fn check_bergman_passes() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "b.json", r#"{"kind":"bergman_shift"}"#);
    let (code, report, _) = woldkit(&["check", "b.json"], dir.path());
    assert_eq!(code, 0);
    assert_eq!(report["ok"], true);
    let cd = report["checks"].as_array().unwrap().iter().find(|c| c["name"] == "class_d").unwrap();
    assert!(cd["residual"].as_f64().unwrap() <= 1e-10);
    assert_eq!(report["params"]["n_max"], 64);
    assert_eq!(report["params"]["j_max"], 256);
    assert_eq!(report["params"]["seed"], 0x5EED);
}

#[test]
fn decompose_unilateral_splits_into_basis_vectors() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "u.json", r#"{"kind":"unilateral_shift"}"#);
    write(dir.path(), "v.json", "[[0, 1.0, 0.0], [1, 1.0, 0.0]]");
    let (code, report, _) = woldkit(&["decompose", "u.json", "--vector", "v.json"], dir.path());
    assert_eq!(code, 0);
    let d = &report["decomposition"];
    assert_eq!(d["components"], serde_json::json!([[[0, 1.0, 0.0]], [[1, 1.0, 0.0]]]));
    assert_eq!(d["reconstruction_residual"], 0.0);
    assert_eq!(d["limit_part"], serde_json::json!([]));
}

#[test]
fn incommensurate_spec_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "t.json", r#"{"kind":"weighted_translation","phi":{"kind":"exp","alpha":1.0},"t":1.0,"h":0.4}"#);
    write(dir.path(), "v.json", "[[0, 1.0, 0.0]]");
    let (code, report, stderr) = woldkit(&["decompose", "t.json", "--vector", "v.json"], dir.path());
    assert_eq!(code, 1);
    assert_eq!(report["error"]["kind"], "spec_invalid");
    assert!(stderr.contains("not an integer multiple"), "{stderr}");
}

#[test]
fn series_cap_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "b.json", r#"{"kind":"bergman_shift"}"#);
    write(dir.path(), "v.json", "[[40, 1.0, 0.0]]");
    let (code, report, _) = woldkit(&["decompose", "b.json", "--vector", "v.json", "--j-max", "5"], dir.path());
    assert_eq!(code, 2);
    assert_eq!(report["error"]["kind"], "convergence");
}

#[test]
fn failed_verdict_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.json", r#"{"kind":"adjoint","of":{"kind":"unilateral_shift"}}"#);
    let (code, report, _) = woldkit(&["check", "a.json"], dir.path());
    assert_eq!(code, 3);
    assert_eq!(report["ok"], false);
}

#[test]
fn rank_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "u.json", r#"{"kind":"unilateral_shift"}"#);
    write(dir.path(), "v.json", "[[0, 0, 1.0, 0.0]]");
    let (code, report, _) = woldkit(&["decompose", "u.json", "--vector", "v.json"], dir.path());
    assert_eq!(code, 1);
    assert_eq!(report["error"]["kind"], "vector");
}

#[test]
fn fourfold_with_oracle_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "p.json", r#"{"kind":"tensor_pair","w1":{"kind":"constant","value":1},"w2":{"kind":"constant","value":1},"lattice1":"Z"}"#);
    write(dir.path(), "v.json", "[[0, 0, 1.0, 0.0], [-1, 2, 0.5, 0.5]]");
    let (code, _, _) = woldkit(&["fourfold", "p.json", "--vector", "v.json", "--oracle", "--out", "r.json"], dir.path());
    assert_eq!(code, 0);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["fourfold"]["inf_s"], serde_json::json!([[-1, 2, 0.5, 0.5], [0, 0, 1.0, 0.0]]));
    assert_eq!(report["oracle"][0]["passed"], true);
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "d.json", r#"{"kind":"dirichlet_shift"}"#);
    let (_, a, _) = woldkit(&["check", "d.json", "--seed", "7"], dir.path());
    let (_, b, _) = woldkit(&["check", "d.json", "--seed", "7"], dir.path());
    assert_eq!(a, b);
    assert_eq!(a["params"]["seed"], 7);
}

#[test]
fn zoo_list_names_every_kind() {
    let dir = tempfile::tempdir().unwrap();
    let (code, report, _) = woldkit(&["zoo", "list"], dir.path());
    assert_eq!(code, 0);
    let kinds: Vec<&str> = report["zoo"].as_array().unwrap().iter().map(|z| z["kind"].as_str().unwrap()).collect();
    assert_eq!(kinds, woldkit::spec::KINDS);
}
