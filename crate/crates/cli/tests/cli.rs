//! End-to-end tests of the rsums binary: outputs, exit codes, determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rsums"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn field_inspection() {
    let out = run(&["field", "--p", "3", "--r", "2"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["generator"], "t + 1");
    assert_eq!(v["order"], "9");
    assert_eq!(v["modulus_qr_codes"], serde_json::json!(["1", "0", "1"]));
}

#[test]
fn composite_characteristic_is_an_error() {
    let out = run(&["field", "--p", "4", "--r", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn kappa_table() {
    let out = run(&["kappa", "--s", "1,5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "s,rho,kappa,tau0,delta_at_tau0,gamma"
    );
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn classify_p_class() {
    let out = run(&[
        "classify", "--p", "3", "--r", "1", "--f", "X^3", "--class", "p",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["verdict"], "non_member");
}

#[test]
fn sum_emits_deterministic_files() {
    let dir = std::env::temp_dir().join(format!("rsums-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv1 = dir.join("a.csv");
    let json1 = dir.join("a.json");
    let csv2 = dir.join("b.csv");
    let json2 = dir.join("b.json");
    let args = |csv: &Path, json: &Path| {
        vec![
            "sum".to_string(),
            "--p".into(),
            "3".into(),
            "--r".into(),
            "4".into(),
            "--f1".into(),
            "X".into(),
            "--f2".into(),
            "X + 1/X".into(),
            "--chi-m".into(),
            "40".into(),
            "--psi-beta".into(),
            "1".into(),
            "--a".into(),
            "0,2".into(),
            "--s".into(),
            "1,5".into(),
            "--csv".into(),
            csv.display().to_string(),
            "--json".into(),
            json.display().to_string(),
        ]
    };
    let out1 = bin().args(args(&csv1, &json1)).output().unwrap();
    assert!(out1.status.success(), "{}", String::from_utf8_lossy(&out1.stderr));
    let out2 = bin().args(args(&csv2, &json2)).output().unwrap();
    assert!(out2.status.success());
    // byte-identical artifacts
    assert_eq!(
        std::fs::read(&csv1).unwrap(),
        std::fs::read(&csv2).unwrap()
    );
    assert_eq!(
        std::fs::read(&json1).unwrap(),
        std::fs::read(&json2).unwrap()
    );
    let csv = std::fs::read_to_string(&csv1).unwrap();
    assert!(csv.starts_with("p,k,r,A,tau,s,f1,f2,chi_m,psi_beta,domain,terms,excluded,magnitude,bound_exponent,ratio"));
    assert_eq!(csv.lines().count(), 3); // header + one row per s
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn budget_exceeded_exit_code() {
    let out = run(&[
        "sum", "--p", "3", "--r", "6", "--f1", "X", "--f2", "X", "--a", "0,2",
        "--max-terms", "3",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn gate_failure_exit_code() {
    // f1 = X^2 is a square, psi principal: neither hypothesis holds
    let dir = std::env::temp_dir().join(format!("rsums-gate-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = serde_json::json!({
        "field": {"p": 3, "k": 1, "r": 2},
        "a_set": ["0", "2"],
        "chi_m": 4,
        "psi_beta": "0",
        "f1": "X^2",
        "f2": "X",
        "domain": "restricted"
    });
    let path = dir.join("gate.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out = run(&["verify-bound", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_bound_passes_on_good_config() {
    let dir = std::env::temp_dir().join(format!("rsums-vb-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = serde_json::json!({
        "field": {"p": 3, "k": 1, "r": 4},
        "a_set": ["0", "2"],
        "chi_m": 40,
        "psi_beta": "1",
        "f1": "X",
        "f2": "1/X",
        "s_list": [1, 5],
        "domain": "restricted"
    });
    let path = dir.join("good.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out = run(&["verify-bound", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["status"]["kind"], "pass");
    assert!(v["verdicts"].as_array().unwrap().len() >= 2);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn lemmas_default_battery() {
    let out = run(&["lemmas", "--p", "3", "--r", "2"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["counts"][0]["count"], 9);
    assert_eq!(v["counts"][1]["count"], 9);
}

#[test]
fn kloosterman_scan_csv() {
    let out = run(&[
        "kloosterman", "--r-list", "4,5", "--samples", "2", "--seed", "9",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn parse_error_exit_code() {
    let out = run(&[
        "sum", "--p", "3", "--r", "2", "--f1", "X/", "--f2", "X", "--a", "0,2",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("byte 2"), "stderr: {err}");
}
