use std::fs;
use std::process::{Command, Output};

const GOLDEN_SWEEP: &str = include_str!("golden/single_qubit_exact.csv");

fn qvme(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qvme")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

/// Rows of a CSV report keyed by header name.
fn records(text: &str) -> Vec<std::collections::HashMap<String, String>> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    lines
        .map(|l| header.iter().zip(l.split(',')).map(|(h, v)| (h.to_string(), v.to_string())).collect())
        .collect()
}

fn num(row: &std::collections::HashMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap_or_else(|_| panic!("{key} = `{}`", row[key]))
}

#[test]
fn sweep_matches_golden_file() {
    let out = qvme(&["--model", "single_qubit_exact", "sweep", "--lambda", "-1,0,0.5,1,2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), GOLDEN_SWEEP);
}

#[test]
fn golden_values_follow_the_two_level_formulas() {
    for row in records(GOLDEN_SWEEP) {
        let l = num(&row, "lambda");
        let r = (1.0 + l * l).sqrt();
        assert!((num(&row, "delta") - (r - 1.0) / 2.0).abs() < 1e-15);
        assert!((num(&row, "d1") - l / (2.0 * r)).abs() < 1e-15);
        assert!((num(&row, "d2") - 0.5 / (r * r * r)).abs() < 1e-15);
        assert!((num(&row, "sigma2") - l * l / (4.0 * r * r)).abs() < 1e-15);
        if l == 0.0 {
            assert_eq!(row["efficiency"], "");
            assert_eq!(row["sigma_q"], "");
        }
    }
}

#[test]
fn numeric_single_qubit_reproduces_the_golden_row() {
    let out = qvme(&["--model", "single_qubit", "sweep", "--lambda", "1"]);
    assert_eq!(code(&out), 0);
    let got = &records(&stdout(&out))[0];
    let want = records(GOLDEN_SWEEP).into_iter().find(|r| r["lambda"] == "1").unwrap();
    for key in ["delta", "d1", "d2", "work", "heat", "efficiency", "sigma2", "ebar", "qfi", "sigma_q"] {
        let (a, b) = (num(got, key), num(&want, key));
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{key}: {a} vs {b}");
    }
    assert_eq!(got["valid"], "true");
}

#[test]
fn json_output_carries_the_same_columns() {
    let out = qvme(&["--model", "two_qubits_exact", "--format", "json", "sweep", "--start", "0", "--stop", "1", "--count", "3"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2]["lambda"], 1.0);
    assert!(rows[0]["efficiency"].is_null());
    assert_eq!(rows[0].as_object().unwrap().len(), 15);
}

#[test]
fn fixture_sweep_has_the_expected_shape() {
    let out = qvme(&["--model", "fixture_10q", "sweep", "--ground-only", "--start", "0", "--stop", "6", "--count", "25"]);
    assert_eq!(code(&out), 0);
    let rows = records(&stdout(&out));
    assert_eq!(rows.len(), 25);
    assert_eq!(rows[0]["efficiency"], "");
    assert_eq!(rows[0]["d2"], "");
    let work: Vec<f64> = rows.iter().map(|r| num(r, "work")).collect();
    assert!(work.windows(2).all(|w| w[1] >= w[0]));
    let eta: Vec<f64> = rows[1..].iter().map(|r| num(r, "efficiency")).collect();
    assert!((eta[0] - 0.5).abs() < 0.02);
    assert!(eta.last().unwrap() < &eta[0]);
}

#[test]
fn efficiency_limit_flag_fills_zero_coupling() {
    let out = qvme(&["--model", "two_qubits", "sweep", "--lambda", "0", "--eta-limit"]);
    assert_eq!(num(&records(&stdout(&out))[0], "efficiency"), 0.5);
}

#[test]
fn compare_passes_for_registered_oracles() {
    let out = qvme(&["--model", "two_qubits", "compare", "--start", "-3", "--stop", "3", "--count", "61"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    for row in records(&stdout(&out)) {
        assert_eq!(row["pass"], "true");
        assert!(num(&row, "max_deviation") <= 1e-9);
    }
    let limit = qvme(&["--model", "tfim_momentum", "compare", "--lambda", "0.5,1,2"]);
    assert_eq!(code(&limit), 0);
    let rows = records(&stdout(&limit));
    assert_eq!(rows.iter().map(|r| r["quantity"].as_str()).collect::<Vec<_>>(), ["delta", "sigma2"]);
    assert!(rows.iter().all(|r| num(r, "max_deviation") <= 1e-3));
}

#[test]
fn compare_at_zero_coupling_reports_zero_deviation() {
    for model in ["single_qubit", "two_qubits"] {
        let out = qvme(&["--model", model, "compare", "--lambda", "0"]);
        assert_eq!(code(&out), 0);
        for row in records(&stdout(&out)) {
            assert!(row["max_deviation"].is_empty() || num(&row, "max_deviation") == 0.0, "{model}: {row:?}");
        }
    }
}

#[test]
fn compare_fails_when_tolerance_is_too_tight() {
    let out = qvme(&["--model", "tfim_momentum", "--tol-override", "compare=1e-12", "compare", "--lambda", "1"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("false"));
}

#[test]
fn montecarlo_is_reproducible_and_consistent() {
    let args = ["--model", "two_qubits", "--seed", "11", "montecarlo", "--lambda", "1"];
    let first = qvme(&args);
    assert_eq!(code(&first), 0, "{}", stdout(&first));
    let again = qvme(&args);
    assert_eq!(first.stdout, again.stdout);
    let mut threaded = args.to_vec();
    threaded.extend(["--threads", "3"]);
    assert_eq!(qvme(&threaded).stdout, first.stdout);
    let row = &records(&stdout(&first))[0];
    for z in ["z_work", "z_var", "z_heat"] {
        assert!(num(row, z).abs() <= 4.0);
    }
    assert_eq!(row["chi_pass"], "true");
    let other = qvme(&["--model", "two_qubits", "--seed", "12", "montecarlo", "--lambda", "1"]);
    assert_ne!(other.stdout, first.stdout);
}

#[test]
fn verify_skips_what_is_undefined() {
    let out = qvme(&["--model", "two_osc_direct", "verify", "--lambda", "0,0.99"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let rows = records(&stdout(&out));
    assert_eq!(rows.len(), 12);
    assert!(rows[..6].iter().all(|r| r["status"] == "skipped" && r["reason"] == "bounds undefined at λ = 0"));
    let upper = rows[6..].iter().find(|r| r["bound"] == "sandwich_upper").unwrap();
    assert_eq!(upper["status"], "skipped");
    assert!(rows[6..].iter().filter(|r| r["bound"] != "sandwich_upper").all(|r| r["status"] == "pass"));
    let sigma2 = num(&records(&stdout(&qvme(&["--model", "two_osc_direct", "sweep", "--lambda", "0.99"])))[0], "sigma2");
    assert!(sigma2 > 1.0);
}

#[test]
fn verify_checks_the_fixture_bounds() {
    let out = qvme(&["--model", "fixture_10q", "verify", "--lambda", "0.1,2.5,5"]);
    assert_eq!(code(&out), 0);
    assert!(records(&stdout(&out)).iter().all(|r| r["status"] == "pass"));
}

#[test]
fn config_table_and_out_file_sources() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("pair.toml");
    fs::write(&config, "kind = \"spin_chain\"\nn_qubits = 2\nomega = 1.0\ncouplings = [[1, 2, 2.0]]\n").unwrap();
    let report = dir.path().join("out.csv");
    let out = qvme(&["--config", config.to_str().unwrap(), "--out", report.to_str().unwrap(), "sweep", "--lambda", "1"]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let from_config = records(&fs::read_to_string(&report).unwrap());
    let builtin = records(&stdout(&qvme(&["--model", "two_qubits_exact", "sweep", "--lambda", "1"])));
    assert!((num(&from_config[0], "delta") - num(&builtin[0], "delta")).abs() < 1e-14);

    let table = dir.path().join("delta.csv");
    let samples: String = (0..=10).map(|i| format!("{},{}\n", i as f64 * 0.2, 0.25 * (i as f64 * 0.2).powi(2))).collect();
    fs::write(&table, format!("lambda,delta\n{samples}")).unwrap();
    let out = qvme(&["--table", table.to_str().unwrap(), "sweep", "--lambda", "1"]);
    assert_eq!(code(&out), 0);
    let row = &records(&stdout(&out))[0];
    assert!((num(row, "delta") - 0.25).abs() < 1e-12);
    assert!((num(row, "efficiency") - 0.5).abs() < 1e-12);
    assert_eq!(row["sigma2"], "");
}

#[test]
fn models_lists_every_builtin() {
    let out = qvme(&["models"]);
    let names: Vec<String> = records(&stdout(&out)).into_iter().map(|r| r["name"].clone()).collect();
    assert!(names.contains(&"fixture_10q".to_string()));
    assert!(names.contains(&"osc_chain_limit".to_string()));
}

#[test]
fn usage_errors_exit_with_two() {
    let cases: &[&[&str]] = &[
        &["--model", "single_qubit", "sweep", "--start", "0", "--stop", "1", "--count", "0"],
        &["--model", "single_qubit", "sweep", "--start", "1", "--stop", "0", "--count", "2"],
        &["--model", "single_qubit", "sweep"],
        &["--model", "nope", "sweep", "--lambda", "1"],
        &["--model", "single_qubit", "--param", "bogus=1", "sweep", "--lambda", "1"],
        &["--model", "single_qubit", "--tol-override", "bogus=1", "sweep", "--lambda", "1"],
        &["--model", "two_qubits", "montecarlo", "--lambda", "1", "--samples", "0"],
        &["--model", "single_qubit_exact", "montecarlo", "--lambda", "1"],
        &["--model", "fixture_10q", "compare", "--lambda", "1"],
        &["--config", "/nonexistent/model.toml", "sweep", "--lambda", "1"],
        &["sweep", "--lambda", "1"],
        &["bogus-command"],
    ];
    for args in cases {
        assert_eq!(code(&qvme(args)), 2, "{args:?}");
    }
}

#[test]
fn solver_failures_exit_with_three() {
    let out = qvme(&["--model", "two_osc_direct", "sweep", "--lambda", "1.5"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("stable"));
}
