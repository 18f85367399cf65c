use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tropfuk")).args(args).current_dir(root()).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn assert_schema(name: &str, v: &Value) {
    let text = std::fs::read_to_string(root().join("schemas").join(name)).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

#[test]
fn graphs_three_legs() {
    let out = run(&["graphs", "--n", "3", "--b", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["count"], 1);
    assert_schema("graphs.schema.json", &v);
}

#[test]
fn graphs_unstable_is_rejected() {
    let out = run(&["graphs", "--n", "1", "--b", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unstable"));
}

#[test]
fn collapsed_triangle_product() {
    let out = run(&["product", "--config", "configs/collapsed_triangle.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_schema("product.schema.json", &v);
    let coeffs = v["coefficients"].as_array().unwrap();
    assert_eq!(coeffs.len(), 1);
    assert_eq!(coeffs[0]["series"], serde_json::json!([{"exp": "0", "coeff": 1}]));
    assert_eq!(v["oracle_agrees"], true);
}

#[test]
fn annulus_product_is_zero() {
    let out = run(&["product", "--config", "configs/quantum.json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_schema("product.schema.json", &v);
    assert_eq!(v["b"], 1);
    assert_eq!(v["zero"], true);
    assert_eq!(v["note"], "annulus tensor is zero");
    assert!(v["oracle_agrees"].is_null());
}

#[test]
fn product_output_is_deterministic() {
    let a = run(&["product", "--config", "configs/triangle_random.json"]);
    let b = run(&["product", "--config", "configs/triangle_random.json"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["oracle_agrees"], true);
    let other_seed = run(&["product", "--config", "configs/triangle_random.json", "--seed", "12"]);
    assert_ne!(a.stdout, other_seed.stdout);
}

#[test]
fn thread_cap_does_not_change_output() {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tropfuk"));
    let capped =
        cmd.args(["product", "--config", "configs/triangle_random.json"]).env("TF_THREADS", "1").current_dir(root()).output().unwrap();
    assert_eq!(capped.stdout, run(&["product", "--config", "configs/triangle_random.json"]).stdout);
}

#[test]
fn non_transversal_config_exits_two() {
    let dir = std::env::temp_dir().join(format!("tropfuk-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.json");
    std::fs::write(&path, r#"{"slopes": [0, 1, 2], "offsets": ["0", "0", "1/2"]}"#).unwrap();
    let out = run(&["product", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not transversal"));
}

#[test]
fn corrupted_config_exits_two() {
    let dir = std::env::temp_dir().join(format!("tropfuk-cli-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("broken.json");
    std::fs::write(&path, r#"{"slopes": [0, 1"#).unwrap();
    let out = run(&["verify", "ainf", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["verify", "ainf", "--sigma", "(1 2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_ainf_passes() {
    let dir = std::env::temp_dir().join(format!("tropfuk-cli-ainf-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = run(&["verify", "ainf", "--config", "configs/ainf.json", "--json-out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_schema("report.schema.json", &v);
    assert_eq!(v["verdict"], "pass");
    assert!(!v["pairs"].as_array().unwrap().is_empty());
}

#[test]
fn verify_quantum_passes_with_certificate() {
    let out = run(&["verify", "quantum", "--config", "configs/quantum.json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_schema("report.schema.json", &v);
    let cert = v["checks"].as_array().unwrap().iter().find(|c| c["name"] == "B_certificate").unwrap();
    assert_eq!(cert["pass"], true);
}

#[test]
fn failing_relation_exits_one() {
    // signing by the surface rule breaks the associativity cancellation
    let dir = std::env::temp_dir().join(format!("tropfuk-cli-surface-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("surface.json");
    std::fs::write(&path, r#"{"slopes": [0, 1, 2, 3], "convention": "surface", "certificate": false}"#).unwrap();
    let out = run(&["verify", "ainf", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_schema("report.schema.json", &v);
    assert_eq!(v["verdict"], "fail");
}

#[test]
fn chainmap_sizes() {
    let out = run(&["verify", "chainmap", "--n", "3", "--b", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["relation"], "chain_map_3_1");
    let out = run(&["verify", "chainmap", "--n", "6", "--b", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn shipped_configs_match_schema() {
    for name in ["collapsed_triangle.json", "ainf.json", "quantum.json", "triangle_random.json"] {
        let v: Value = serde_json::from_str(&std::fs::read_to_string(root().join("configs").join(name)).unwrap()).unwrap();
        assert_schema("config.schema.json", &v);
    }
}
