//! End-to-end tests of the `weibull-tail` binary: argument handling, exit
//! codes, and the file formats it emits.

use std::fmt::Write as _;
use std::process::{Command, Output};

use weibull_tail::amse::amse;
use weibull_tail::distributions::parse_model_spec;
use weibull_tail::estimators::EstimatorVariant;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weibull-tail"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("no signal")
}

#[test]
fn estimate_recovers_tail_coefficient_from_file() {
    let model = parse_model_spec("weibull:2.5,2.5").unwrap();
    let sample = model.sample(400, 42).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("obs.txt");
    let mut text = String::from("# simulated observations\n\n");
    for v in sample.values() {
        let _ = writeln!(text, "{v}");
    }
    std::fs::write(&path, text).unwrap();

    let out = run(&[
        "estimate",
        "--input",
        path.to_str().unwrap(),
        "--k-min",
        "50",
        "--k-max",
        "50",
        "--variants",
        "v1",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let body = stdout(&out);
    let mut lines = body.lines();
    assert_eq!(lines.next().unwrap(), "k,variant,t_n,a_n,theta_hat");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "50");
    assert_eq!(row[1], "V1");
    let theta: f64 = row[4].parse().unwrap();
    assert!(
        (theta - 0.4).abs() < 0.15,
        "estimate {theta} too far from 0.4"
    );
    assert!(lines.next().is_none(), "asked for a single (k, variant) row");
}

#[test]
fn estimate_rejects_too_small_samples() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.txt");
    std::fs::write(&path, "# nothing but comments\n").unwrap();
    let out = run(&["estimate", "--input", path.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(
        stderr(&out).contains("need at least 3 observations"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn estimate_reports_unparseable_lines_with_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "1.5\nnot-a-number\n2.5\n").unwrap();
    let out = run(&["estimate", "--input", path.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let err = stderr(&out);
    assert!(err.contains("line 2"), "stderr: {err}");
    assert!(err.contains("not-a-number"), "stderr: {err}");
}

#[test]
fn estimate_rejects_nonpositive_observations() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("neg.txt");
    std::fs::write(&path, "1.5\n2.5\n-3.0\n4.5\n").unwrap();
    let out = run(&["estimate", "--input", path.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let err = stderr(&out);
    assert!(err.contains("line 3"), "stderr: {err}");
    assert!(err.contains("must be positive"), "stderr: {err}");
}

#[test]
fn estimate_enforces_extrapolation_regime() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("obs.txt");
    std::fs::write(&path, "1.0\n2.0\n3.0\n4.0\n5.0\n").unwrap();
    // p = 0.25 >= 1/5: interpolation, not extrapolation.
    let out = run(&[
        "estimate",
        "--input",
        path.to_str().unwrap(),
        "--p",
        "0.25",
    ]);
    assert_eq!(code(&out), 3);
    assert!(
        stderr(&out).contains("p < 1/n"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn amse_table_round_trips_library_values() {
    let out = run(&[
        "amse",
        "--model",
        "gamma:1.5,1",
        "--n",
        "500",
        "--k-min",
        "10",
        "--k-max",
        "20",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let model = parse_model_spec("gamma:1.5,1").unwrap();
    let mut expected = String::from("k,variant,bias_sq,variance,total\n");
    for k in 10..=20 {
        for variant in EstimatorVariant::ALL {
            let p = amse(&model, 500, k, variant).unwrap();
            let _ = writeln!(
                expected,
                "{},{},{},{},{}",
                p.k, p.variant, p.bias_sq, p.variance, p.total
            );
        }
    }
    assert_eq!(stdout(&out), expected, "CSV must round-trip bit-exactly");
}

#[test]
fn simulate_writes_tables_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "simulate",
        "--model",
        "absnormal:0,1",
        "--n",
        "80",
        "--replications",
        "4",
        "--k-min",
        "2",
        "--k-max",
        "10",
        "--seed",
        "9",
        "--p",
        "0.001",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let mse = std::fs::read_to_string(dir.path().join("absnormal_0_1_mse.csv")).unwrap();
    assert_eq!(mse.lines().count(), 1 + 9 * 3, "header plus one row per cell");
    assert_eq!(
        mse.lines().next().unwrap(),
        "k,variant,bias_sq,variance,total,estimator"
    );
    assert!(mse.lines().nth(1).unwrap().ends_with(",mse"));

    let quant =
        std::fs::read_to_string(dir.path().join("absnormal_0_1_quantile_mse.csv")).unwrap();
    assert!(quant.lines().nth(1).unwrap().ends_with(",quantile_mse"));

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["slug"], "absnormal_0_1");
    let files: Vec<&str> = manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f.as_str().unwrap())
        .collect();
    assert_eq!(
        files,
        ["absnormal_0_1_mse.csv", "absnormal_0_1_quantile_mse.csv"]
    );
}

#[test]
fn compare_predicts_the_three_catalog_orderings() {
    let out = run(&["compare", "--model", "gamma:1.5,1"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("AMSE(V2) < AMSE(V1) < AMSE(V3)"));

    let out = run(&["compare", "--model", "absnormal:0,1"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("AMSE(V3) < AMSE(V1) < AMSE(V2)"));

    let out = run(&["compare", "--model", "weibull:2.5,2.5"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("AMSE(V1) <= min(AMSE(V2), AMSE(V3))"));
}

#[test]
fn compare_bias_balancing_rule_is_undefined_for_weibull() {
    // The Weibull family has zero bias, so no k balances bias and variance.
    let out = run(&["compare", "--model", "weibull:2.5,2.5", "--k-rule", "sqrt-b"]);
    assert_eq!(code(&out), 3);
    assert!(
        stderr(&out).contains("undefined rate"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn figures_produces_full_catalog_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "figures",
        "--out",
        dir.path().to_str().unwrap(),
        "--n",
        "60",
        "--replications",
        "3",
        "--k-max",
        "20",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "figures");
    assert_eq!(manifest["models"].as_array().unwrap().len(), 5);
    let files = manifest["files"].as_array().unwrap();
    assert_eq!(files.len(), 15, "mse + amse + svg per model");

    for file in files {
        let path = dir.path().join(file.as_str().unwrap());
        assert!(path.exists(), "missing {}", path.display());
    }
    let svg = std::fs::read_to_string(dir.path().join("weibull_2.5_2.5.svg")).unwrap();
    assert!(svg.starts_with("<?xml"));
    assert!(svg.contains("<polyline"));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert_eq!(
        svg.matches("<polyline").count(),
        6,
        "three variants on each of two panels"
    );
}

#[test]
fn missing_input_file_is_an_io_error() {
    let out = run(&["estimate", "--input", "/definitely/not/here.txt"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn unknown_flags_are_usage_errors() {
    let out = run(&["estimate", "--bogus-flag"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn numerical_failures_exit_with_code_4() {
    // An extreme gamma shape combined with a deep-tail quantile order drives
    // the tail inversion outside its validity; that must surface as a
    // numerical error, not a wrong answer.
    let out = run(&[
        "simulate",
        "--model",
        "gamma:4000,1",
        "--n",
        "30",
        "--replications",
        "2",
        "--k-min",
        "2",
        "--k-max",
        "3",
        "--p",
        "1e-15",
        "--out",
        tempfile::tempdir().unwrap().path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 4, "stderr: {}", stderr(&out));
    assert!(
        stderr(&out).contains("numerical failure"),
        "stderr: {}",
        stderr(&out)
    );
}
