use std::path::Path;
use std::process::{Command, Output};

fn qflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

const GAMMA: [&str; 9] = [
    "gamma",
    "--statement",
    "1",
    "--q",
    "0.8",
    "--mu",
    "0.3",
    "--sigma",
    "1.4",
];

#[test]
fn gamma_output_is_byte_identical() {
    let a = qflow(&GAMMA);
    let b = qflow(&GAMMA);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "h,value,limit,abs_error");
    assert_eq!(data.len(), 12);
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let mut args = GAMMA.to_vec();
    args.extend(["--out", path.to_str().unwrap()]);
    assert!(qflow(&args).status.success());
    assert_eq!(std::fs::read(&path).unwrap(), qflow(&GAMMA).stdout);
}

#[test]
fn json_output_validates_against_schema() {
    let schema_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas/convergence_table.schema.json");
    let schema: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(schema_path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    for statement in ["1", "2", "3"] {
        let out = qflow(&[
            "gamma", "--statement", statement, "--q", "0.8", "--mu", "0.3", "--sigma", "1.4", "--format", "json",
            "--h-grid", "1e-2:1e-5:4",
        ]);
        assert!(out.status.success());
        let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        let errors: Vec<String> = validator.iter_errors(&doc).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{errors:?}");
        assert_eq!(doc["rows"].as_array().unwrap().len(), 4);
    }
}

#[test]
fn statement_three_rejects_q_above_one() {
    let out = qflow(&["gamma", "--statement", "3", "--q", "1.2", "--mu", "0.3", "--sigma", "1.4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("0 < q < 1"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["gamma", "--statement", "4", "--q", "0.8", "--mu", "0", "--sigma", "1"],
        vec!["gamma", "--statement", "1", "--q", "0.8", "--mu", "0", "--sigma", "1", "--h-grid", "1e-6:1e-1:3"],
        vec!["const", "--q", "1.0"],
        vec!["jko", "--q", "0.8", "--h", "0.1", "--steps", "0"],
    ] {
        assert_eq!(qflow(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn verify_scope_filtering() {
    let out = qflow(&["verify", "--scope", "qmath"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let checks = report["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["scope"] == "qmath"));
    assert_eq!(report["passed"], true);
}

#[test]
fn verify_fault_injection_exits_one() {
    let out = qflow(&["verify", "--scope", "qmath", "--inject-c0-perturbation", "1e-3"]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let identity = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "scale_identity_d1")
        .unwrap();
    assert_eq!(identity["passed"], false);
}

#[test]
fn jko_and_const_commands() {
    let out = qflow(&["jko", "--q", "0.8", "--h", "0.05", "--steps", "10"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("n,mu,sigma,sigma_exact,abs_error\n1,0,"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 11);

    let out = qflow(&["const", "--q", "0.8"]);
    assert!(out.status.success());
    let c: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((c["c"].as_f64().unwrap() - 1.593405336470841).abs() < 1e-13);
}
