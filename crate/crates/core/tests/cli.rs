use std::process::Command;

use serde_json::Value;
use vangeo::cli::{run, Outcome};

fn go(args: &[&str]) -> Outcome {
    run(std::iter::once("vangeo").chain(args.iter().copied()))
}

fn json(args: &[&str]) -> Value {
    let out = go(args);
    assert_eq!(out.code, 0, "{}", out.stderr);
    serde_json::from_str(&out.stdout).expect("valid json")
}

#[test]
fn inverse_examples() {
    let out = go(&["inverse", "--base", "2", "--n", "2", "--format", "csv"]);
    assert_eq!(out.stdout, "2,-1\n-1,1\n");
    assert_eq!(go(&["inverse", "--base", "3/2", "--n", "1"]).stdout, "1\n");

    let v = json(&[
        "inverse", "--base", "tau", "--n", "3", "--digits", "30", "--format", "json",
    ]);
    assert_eq!(v["n"], 3);
    assert_eq!(v["backend"], "rigorous");
    assert_eq!(v["entries"].as_array().unwrap().len(), 9);
    assert_eq!(v["radii"].as_array().unwrap().len(), 9);
    assert!(v["entries"][1]
        .as_str()
        .unwrap()
        .starts_with("-4.2360679774997896964"));

    let text = go(&["inverse", "--base", "tau", "--n", "3", "--digits", "30"]).stdout;
    assert!(text.contains("residual"));

    let v = json(&["inverse", "--base", "3", "--n", "3", "--format", "json"]);
    assert_eq!(v["backend"], "exact");
    assert!(v.get("radii").is_none());
    assert!(v["entries"]
        .as_array()
        .unwrap()
        .iter()
        .any(|e| e.as_str().unwrap().contains('/')));
}

#[test]
fn max_examples() {
    let out = go(&["max", "--base", "2", "--n", "2"]).stdout;
    assert!(
        out.starts_with("M = 2.000") && out.contains("exact = 2\n"),
        "{out}"
    );
    assert!(out.contains("argmax = (0,0)\n") && out.contains("n_zero = 1\n"));

    let out = go(&["max", "--base", "2", "--n", "40", "--digits", "12"]).stdout;
    assert!(out.starts_with("M = 5.19411992"), "{out}");
    assert!(out.contains("argmax = (1,1)\n"));

    let v = json(&["max", "--base", "1.2", "--n", "12", "--format", "json"]);
    assert_eq!(v["n_zero"], 4);
    for key in [
        "base",
        "n",
        "max",
        "argmax",
        "diagonal",
        "within_n_zero_box",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn limit_examples() {
    let v = json(&["limit", "--base", "2", "--tol", "1e-18", "--format", "json"]);
    assert!(v["max"]
        .as_str()
        .unwrap()
        .starts_with("5.194119929182595417"));
    assert_eq!(v["regime"], "between_tau_alpha");
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 3);
    for e in entries {
        for key in [
            "i",
            "j",
            "value",
            "radius",
            "sigma_cutoff",
            "product_cutoff",
        ] {
            assert!(e.get(key).is_some(), "missing {key}");
        }
    }
    for key in ["base", "n_zero", "argmax"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }

    let out = go(&["limit", "--base", "tau", "--tol", "1e-20"]).stdout;
    assert!(out.contains("max = 26.788216012030303413"), "{out}");

    let v = json(&[
        "limit", "--base", "1.3", "--tol", "1e-3", "--format", "json",
    ]);
    let max: f64 = v["max"].as_str().unwrap().parse().unwrap();
    assert_eq!(format!("{max:.2}"), "3069.44");
    assert_eq!(v["n_zero"], 3);
    assert_eq!(v["regime"], "below_tau");
}

#[test]
fn sigma_command() {
    let v = json(&[
        "sigma", "--i", "3", "--j", "1", "--n", "4", "--x", "2", "--format", "json",
    ]);
    assert_eq!(v["value"], "32");
    let v = json(&[
        "sigma",
        "--i",
        "1",
        "--j",
        "1",
        "--n",
        "4",
        "--x",
        "1/2",
        "--bruteforce",
        "--format",
        "json",
    ]);
    assert_eq!(v["value"], "11/8");
    assert_eq!(v["bruteforce_agrees"], true);
    assert_eq!(
        go(&["sigma", "--i", "4", "--j", "0", "--n", "4", "--x", "2"]).code,
        2
    );
}

#[test]
fn table_rows_match() {
    let out = go(&["table", "--format", "csv"]);
    assert_eq!(out.code, 0);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines.len(), 9);
    assert!(
        lines[1].starts_with("3,1,(0,0),1.785312341998534190367486,1.785312341998534190367486,")
    );
    assert!(lines[2].starts_with("alpha,") && lines[2].contains(",2.4862447382651613433,"));
    assert!(lines[6].starts_with("1.4,2,(2,2),282.398,"));
    assert!(lines[1..].iter().all(|l| l.ends_with(",match")));
}

#[test]
fn verify_examples() {
    let out = go(&["verify", "--base", "2", "--n-max", "20"]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    assert!(out.stdout.ends_with("all checks pass\n"));

    let out = go(&["verify", "--base", "6/5", "--n-max", "16"]);
    assert_eq!(out.code, 0);
    for check in ["extremal-box", "node-product-monotone", "sigma-j-monotone"] {
        let line = out.stdout.lines().find(|l| l.starts_with(check)).unwrap();
        assert!(line.ends_with("pass"), "{line}");
    }

    let v = json(&[
        "verify", "--base", "3/2", "--n-max", "10", "--format", "json",
    ]);
    assert_eq!(v["pass"], true);
    let checks = v["checks"].as_array().unwrap();
    let gated = checks
        .iter()
        .find(|c| c["name"] == "two-candidate-max")
        .unwrap();
    assert_eq!(gated["status"], "skipped");
    assert!(checks
        .iter()
        .filter(|c| c["name"] != "two-candidate-max")
        .all(|c| c["status"] == "pass"));

    assert_eq!(go(&["verify", "--base", "2", "--n-max", "1"]).code, 2);
}

#[test]
fn conjecture_examples() {
    let v = json(&[
        "conjecture",
        "--base",
        "2",
        "--range",
        "2:30",
        "--format",
        "json",
    ]);
    assert_eq!(v["rows"].as_array().unwrap().len(), 29);
    assert!(v["non_diagonal"].is_array());
    let out = go(&["conjecture", "--base", "3", "--range", "2:30"]).stdout;
    assert!(out
        .lines()
        .last()
        .unwrap()
        .contains("non-diagonal case(s) in n = 2..30"));
    let v = json(&[
        "conjecture",
        "--base",
        "1.3",
        "--range",
        "2:20",
        "--format",
        "json",
    ]);
    assert!(v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["n_zero"] == 3));
    assert_eq!(go(&["conjecture", "--base", "2", "--range", "1:5"]).code, 2);
    assert_eq!(go(&["conjecture", "--base", "2", "--range", "9:5"]).code, 2);
}

#[test]
fn usage_errors() {
    for args in [
        &["inverse", "--base", "0.5", "--n", "3"][..],
        &["inverse", "--base", "abc", "--n", "3"],
        &["inverse", "--base", "2"],
        &["max", "--base", "2", "--n", "3", "--digits", "0"],
        &["limit", "--base", "2", "--tol", "-1"],
        &["max", "--base", "2", "--n", "3", "--format", "xml"],
        &[],
    ] {
        let out = go(args);
        assert_eq!(out.code, 2, "{args:?}");
        assert!(out.stdout.is_empty() && !out.stderr.is_empty());
    }
    assert_eq!(go(&["--help"]).code, 0);
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["inverse", "--base", "alpha", "--n", "5", "--format", "json"][..],
        &[
            "limit", "--base", "1.4", "--tol", "1e-12", "--format", "json",
        ],
        &[
            "conjecture",
            "--base",
            "6/5",
            "--range",
            "2:14",
            "--format",
            "csv",
        ],
        &["max", "--base", "tau", "--n", "12"],
    ] {
        assert_eq!(go(args), go(args), "{args:?}");
    }
}

#[test]
fn binary_exit_codes_and_env_ceiling() {
    let bin = env!("CARGO_BIN_EXE_vangeo");
    let out = Command::new(bin)
        .args(["max", "--base", "2", "--n", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let out = Command::new(bin)
        .args(["max", "--n", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // a low ceiling leaves the exact tie at alpha undecided but still reports it
    let out = Command::new(bin)
        .args(["limit", "--base", "alpha", "--tol", "1e-10"])
        .env("VANGEO_PRECISION_CEILING", "256")
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.contains("argmax = (0,0) (1,1)") && text.contains("tie undecided"),
        "{text}"
    );
}
