use std::process::Command;

fn ufl(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ufl")).args(args).output().unwrap()
}

#[test]
fn generate_then_solve() {
    let dir = std::env::temp_dir().join(format!("ufl-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("inst.txt");
    let p = path.to_str().unwrap();
    assert!(ufl(&["gen", "--kind", "two-level", "--m", "5", "--n", "8", "--out", p]).status.success());
    let out = ufl(&["solve", "--algo", "exact", "--input", p]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["ratio_lp"].as_f64().unwrap() >= 1.0 - 1e-9);
    assert_eq!(report["assignment"].as_array().unwrap().len(), 8);
    assert_eq!(ufl(&["solve", "--algo", "a1", "--gamma", "2.5", "--input", p]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn missing_input_is_an_input_error() {
    assert_eq!(ufl(&["solve", "--input", "/nonexistent/instance.txt"]).status.code(), Some(2));
}
