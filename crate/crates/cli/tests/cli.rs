use std::path::PathBuf;

use divkit_cli::{run, Outcome};
use serde_json::Value;
use tempfile::TempDir;

fn divkit(args: &[&str]) -> Outcome {
    let mut argv = vec!["divkit"];
    argv.extend_from_slice(args);
    run(argv)
}

fn json(out: &Outcome) -> Value {
    assert_eq!(out.status, 0, "stderr: {}", out.stderr);
    serde_json::from_str(&out.stdout).expect("stdout is JSON")
}

struct Files {
    dir: TempDir,
}

impl Files {
    fn new() -> Self {
        Files {
            dir: TempDir::new().unwrap(),
        }
    }

    fn write(&self, name: &str, body: &str) -> String {
        let path: PathBuf = self.dir.path().join(name);
        std::fs::write(&path, body).unwrap();
        path.to_string_lossy().into_owned()
    }
}

fn half_and_quarter(files: &Files) -> (String, String) {
    (
        files.write("a.json", r#"{"labels": ["a", "b"], "probs": [0.5, 0.5]}"#),
        files.write("b.json", r#"{"labels": ["a", "b"], "probs": [0.25, 0.75]}"#),
    )
}

#[test]
fn renyi_value_of_the_binary_pair() {
    let files = Files::new();
    let (a, b) = half_and_quarter(&files);
    let v = json(&divkit(&["div", "--div", "renyi:2", "--mu1", &a, "--mu2", &b]));
    let value = v["value"].as_f64().unwrap();
    assert!((value - (4.0f64 / 3.0).ln()).abs() < 1e-11);
    assert_eq!(v["units"], "nats");
}

#[test]
fn self_divergence_is_zero() {
    let files = Files::new();
    let (a, _) = half_and_quarter(&files);
    let v = json(&divkit(&["div", "--div", "kl", "--mu1", &a, "--mu2", &a]));
    assert_eq!(v["value"].as_f64(), Some(0.0));
}

#[test]
fn bits_rescale_logarithmic_values_only() {
    let files = Files::new();
    let (a, b) = half_and_quarter(&files);
    let nats = json(&divkit(&["div", "--div", "kl", "--mu1", &a, "--mu2", &b]));
    let bits = json(&divkit(&["div", "--div", "kl", "--mu1", &a, "--mu2", &b, "--bits"]));
    let ratio = nats["value"].as_f64().unwrap() / bits["value"].as_f64().unwrap();
    assert!((ratio - std::f64::consts::LN_2).abs() < 1e-10);
    assert_eq!(bits["units"], "bits");
    let tv = json(&divkit(&["div", "--div", "tv", "--mu1", &a, "--mu2", &b, "--bits"]));
    assert_eq!(tv["value"].as_f64(), Some(0.25));
}

#[test]
fn infinite_values_print_as_inf() {
    let files = Files::new();
    let a = files.write("a.json", r#"{"labels": ["x", "y"], "probs": [1.0, 0.0]}"#);
    let b = files.write("b.json", r#"{"labels": ["x", "y"], "probs": [0.0, 1.0]}"#);
    let v = json(&divkit(&["div", "--div", "max", "--mu1", &a, "--mu2", &b]));
    assert_eq!(v["value"], "inf");
}

#[test]
fn counterexample_cut() {
    let v = json(&divkit(&["cut", "--div", "renyi:2", "--k", "2", "--counterexample", "2,4"]));
    assert!((v["gap"].as_f64().unwrap() - 0.0496956).abs() < 1e-6);
    assert_eq!(v["witness"]["a"], "0");
    assert_eq!(v["witness"]["b"], "1");
    let closed = json(&divkit(&[
        "cut",
        "--div",
        "renyi:2",
        "--k",
        "3",
        "--counterexample",
        "2,4",
        "--closed-form",
    ]));
    assert!(closed["gap"].as_f64().unwrap().abs() < 1e-9);
    let bad = divkit(&["cut", "--div", "kl", "--k", "2", "--counterexample", "2,4", "--closed-form"]);
    assert_eq!(bad.status, 1);
}

#[test]
fn gen_test_on_pair_and_sample() {
    let v = json(&divkit(&["gen-test", "--div", "renyi:2", "--k", "2", "--counterexample", "2,4"]));
    assert_eq!(v["generated_on_pair"], false);
    let v = json(&divkit(&["gen-test", "--div", "eps:0.5", "--k", "2", "--trials", "50", "--seed", "9"]));
    assert_eq!(v["generated_on_sample"], true);
    assert_eq!(v["counterexamples"], 0);
    let v = json(&divkit(&["gen-test", "--div", "renyi:2", "--k", "2", "--trials", "200"]));
    assert!(v["max_gap"].as_f64().unwrap() > 0.0);
}

#[test]
fn region_commands() {
    let v = json(&divkit(&["region", "--spec", "renyi:2,1.0", "--contains", "0.3,0.4"]));
    assert_eq!(v["inside"], true);
    let csv = divkit(&["region", "--spec", "dp:0.67,0.05", "--boundary", "512", "--out", "csv"]);
    assert_eq!(csv.status, 0);
    let lines: Vec<&str> = csv.stdout.lines().collect();
    assert_eq!(lines[0], "pfa,pmd");
    assert_eq!(lines.len(), 513);
    assert_eq!(lines[512], "0.95,0");
    let v = json(&divkit(&["region", "--spec", "renyi:2,1", "--within", "dp:4.2189,0.01"]));
    assert_eq!(v["contained"], true);
    let svg = divkit(&["region", "--spec", "hd:0.1", "--boundary", "64", "--format", "svg"]);
    assert!(svg.stdout.starts_with("<svg"));
    assert_eq!(svg.stdout.matches("<polyline").count(), 2);
    let flag = divkit(&["region", "--spec", "hd:0.1", "--boundary", "64", "--svg"]);
    assert_eq!(flag, svg);
}

#[test]
fn conversions() {
    let m = json(&divkit(&[
        "convert", "rdp2dp", "--alpha", "2", "--rho", "1", "--delta", "0.01", "--method", "mironov",
    ]));
    assert!((m["eps"].as_f64().unwrap() - 5.605170).abs() < 1e-6);
    let r = json(&divkit(&["convert", "rdp2dp", "--alpha", "2", "--rho", "1", "--delta", "0.01"]));
    assert_eq!(r["method"], "refined");
    assert!((r["eps"].as_f64().unwrap() - 4.218876).abs() < 1e-6);
    let t = json(&divkit(&[
        "convert", "rdp2dp", "--alpha", "2", "--rho", "1", "--delta", "0.01", "--method", "tangent",
    ]));
    assert!(t["eps"].as_f64().unwrap() < 4.218876);
    let h = json(&divkit(&["convert", "hd2dp", "--eps", "1", "--rho", "0.1"]));
    assert!(h["aux"]["t"].as_f64().is_some());
    let zero = divkit(&["convert", "hd2dp", "--eps", "1", "--rho", "0"]);
    assert_eq!(zero.status, 1);
    let err: Value = serde_json::from_str(zero.stderr.trim()).unwrap();
    assert_eq!(err["error"], "domain");
}

#[test]
fn falsify_is_seeded() {
    let args = [
        "convert", "falsify", "--div", "renyi:2", "--rho", "1", "--eps", "0", "--delta", "0.01",
        "--trials", "200", "--seed", "4",
    ];
    let first = divkit(&args);
    let v = json(&first);
    assert_eq!(v["falsified"], true);
    assert_eq!(v["seed"], 4);
    assert_eq!(first, divkit(&args));
}

#[test]
fn bvn_of_the_half_channel() {
    let files = Files::new();
    let c = files.write(
        "c.json",
        r#"{"in_labels": ["x", "y"], "out_labels": ["0", "1"], "matrix": [[0.5, 0.5], [0.5, 0.5]]}"#,
    );
    let v = json(&divkit(&["bvn", "--channel", &c]));
    let terms = v["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 2);
    assert_eq!(terms[0]["weight"].as_f64(), Some(0.5));
    assert_eq!(terms[0]["rule"]["x"], "0");
    assert_eq!(terms[0]["rule"]["y"], "0");
    assert_eq!(terms[1]["rule"]["x"], "1");
    assert_eq!(v["reconstruction_error"].as_f64(), Some(0.0));
}

#[test]
fn rr_cloud_csv() {
    let out = divkit(&["rr-cloud", "--bits", "3", "--flip", "0.34", "--region", "dp:0.67,0.05", "--out", "csv"]);
    assert_eq!(out.status, 0);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines.len(), 257);
    assert_eq!(lines[0], "pfa,pmd,inside");
    assert_eq!(lines[1], "0,1,true");
    assert!(lines[1..].iter().all(|l| l.ends_with(",true")));
    let all = divkit(&["rr-cloud", "--bits", "2", "--all-pairs"]);
    assert_eq!(all.stdout.lines().count(), 1 + 4 * 16);
    assert!(all.stdout.starts_with("x0,x1,pfa,pmd,inside\n00,10,"));
}

#[test]
fn claims() {
    let v = json(&divkit(&["check", "--mech", "rr:3,0.34", "--claim", "zcdp:0.6633,0"]));
    assert_eq!(v["holds"], true);
    assert_eq!(v["verification"], "grid_verified");
    let v = json(&divkit(&["check", "--mech", "rr:3,0.34", "--claim", "dp:0.65,0"]));
    assert_eq!(v["holds"], false);
    assert!(v["witness"]["x0"].is_string());
}

#[test]
fn errors_and_usage() {
    let out = divkit(&["frobnicate"]);
    assert_eq!(out.status, 2);
    assert!(out.stdout.is_empty());
    let out = divkit(&["div", "--div", "kl", "--mu1", "/nonexistent/a.json", "--mu2", "/nonexistent/b.json"]);
    assert_eq!(out.status, 1);
    let err: Value = serde_json::from_str(out.stderr.trim()).unwrap();
    assert_eq!(err["error"], "io");
    assert_eq!(out.stderr.lines().count(), 1);

    let files = Files::new();
    let bad = files.write("bad.json", r#"{"labels": ["a", "b"], "probs": [0.5, 0.6]}"#);
    let out = divkit(&["div", "--div", "kl", "--mu1", &bad, "--mu2", &bad]);
    assert_eq!(out.status, 1);
    let err: Value = serde_json::from_str(out.stderr.trim()).unwrap();
    assert_eq!(err["error"], "domain");

    let out = divkit(&["cut", "--div", "renyi:2", "--k", "3", "--counterexample", "2,3"]);
    assert_eq!(out.status, 1);

    let help = divkit(&["--help"]);
    assert_eq!(help.status, 0);
    assert!(help.stdout.contains("rr-cloud"));
}

#[test]
fn capacity_errors_are_reported() {
    let files = Files::new();
    let probs = vec![1.0 / 30.0; 30];
    let labels: Vec<String> = (0..30).map(|i| format!("\"{i}\"")).collect();
    let body = format!(
        "{{\"labels\": [{}], \"probs\": {:?}}}",
        labels.join(","),
        probs
    );
    let a = files.write("big.json", &body);
    let out = divkit(&["cut", "--div", "eps:0", "--k", "2", "--mu1", &a, "--mu2", &a]);
    assert_eq!(out.status, 1);
    let err: Value = serde_json::from_str(out.stderr.trim()).unwrap();
    assert_eq!(err["error"], "capacity");
}

#[test]
fn output_is_deterministic() {
    let args = ["rr-cloud", "--bits", "3", "--format", "json"];
    assert_eq!(divkit(&args), divkit(&args));
}
