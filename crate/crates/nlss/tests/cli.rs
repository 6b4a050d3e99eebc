use std::process::Command;

fn nlss(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_nlss")).args(args).output().unwrap()
}

#[test]
fn empty_suite_list_is_usage_error() {
    let out = nlss(&["check"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty suite list"));
}

#[test]
fn unknown_suite_is_usage_error() {
    let out = nlss(&["check", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_config_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# too many sites\nsites = 40\n").unwrap();
    let out = nlss(&["check", "rmatrix", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sites"));
}

#[test]
fn flags_override_file_and_report_is_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "m = 3\nsamples = 2\n").unwrap();
    let report = dir.path().join("r.json");
    let out = nlss(&["check", "rmatrix", "--config", cfg.to_str().unwrap(), "--m", "1", "--output", report.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let arr = v.as_array().unwrap();
    assert!(!arr.is_empty());
    assert!(arr.iter().all(|r| r["pass"] == true && r["check_id"].as_str().unwrap().starts_with("rmatrix.")));
    let props = arr.iter().find(|r| r["check_id"] == "rmatrix.properties").unwrap();
    assert_eq!(props["params"]["m"], "1");
}
