use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bessel-models"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn zeros_at_printed_precision() {
    let o = run(&["zeros", "--order", "0", "--count", "1", "--precision", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "n,j,j_squared\n1,2.40,5.78\n");
    let o = run(&["zeros", "--order", "1", "--count", "1", "--precision", "2"]);
    assert_eq!(stdout(&o), "n,j,j_squared\n1,3.83,14.68\n");
}

#[test]
fn negative_order_accepted() {
    let o = run(&["zeros", "--order", "-0.5", "--count", "2"]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    let j: f64 = r[1][1].parse().unwrap();
    assert!((j - 3.0 * std::f64::consts::FRAC_PI_2).abs() < 1e-12);
}

#[test]
fn modulus_curve_is_non_increasing() {
    let o = run(&[
        "curve",
        "--kind",
        "relax_modulus",
        "--order",
        "0.5",
        "--grid",
        "log",
        "1e-3",
        "10",
        "50",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("t,value,provenance\n"));
    let r = rows(&text);
    assert_eq!(r.len(), 50);
    let v: Vec<f64> = r.iter().map(|row| row[1].parse().unwrap()).collect();
    assert!(v.windows(2).all(|w| w[1] <= w[0]));
    assert!(r.iter().all(|row| row[2] == "series"));
}

#[test]
fn rows_below_min_time_are_labelled() {
    let o = run(&[
        "curve", "--kind", "psi", "--order", "0", "--grid", "log", "1e-8", "1e-2", "4",
    ]);
    let r = rows(&stdout(&o));
    assert_eq!(r[0][2], "asymptotic_short");
    assert_eq!(r[3][2], "series");
}

#[test]
fn oracle_check_passes() {
    let o = run(&["oracle-check", "--order", "1", "--t", "0.1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for row in rows(&stdout(&o)) {
        let gap: f64 = row[4].parse().unwrap();
        assert!(gap <= 1e-6);
        assert_eq!(row[6], "true");
    }
}

#[test]
fn asymptote_compare_columns() {
    let o = run(&[
        "asymptote-compare",
        "--kind",
        "relax_rate",
        "--order",
        "1",
        "--grid",
        "log",
        "1e-4",
        "5",
        "3",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("t,series,short,long,best_branch,provenance\n"));
    let r = rows(&text);
    assert_eq!(r[0][4], "short_time");
    assert_eq!(r[2][4], "long_time");
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = run(&[
            "curve",
            "--kind",
            "creep_compliance",
            "--order",
            "0.25",
            "--grid",
            "lin",
            "0",
            "3",
            "200",
            "--output",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn respond_reads_history_csv() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("step.csv");
    std::fs::write(&input, "time,value\n0,1\n1,1\n2,1\n").unwrap();
    let o = run(&[
        "respond",
        "--order",
        "0",
        "--input",
        input.to_str().unwrap(),
        "--response",
        "stress",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 3);
    let g0: f64 = r[0][1].parse().unwrap();
    assert!((g0 - 1.0).abs() < 1e-12);

    let o = run(&[
        "respond",
        "--order",
        "0",
        "--input",
        input.to_str().unwrap(),
        "--response",
        "strain",
        "--grid",
        "lin",
        "0",
        "3",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "hereditary");
}

#[test]
fn invalid_config_gives_error_record() {
    for args in [
        vec!["zeros", "--order", "-1", "--count", "1"],
        vec!["curve", "--kind", "psi", "--order", "0"],
        vec![
            "curve", "--kind", "nonsense", "--order", "0", "--grid", "log", "1", "2", "3",
        ],
        vec![
            "curve", "--kind", "psi", "--order", "0", "--grid", "log", "0", "2", "3",
        ],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
        assert!(err["error"].is_string() && err["message"].is_string());
    }
}

#[test]
fn validate_report_shape() {
    let o = run(&["validate"]);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let checks = report["checks"].as_array().unwrap();
    assert!(checks.len() >= 9);
    for c in checks {
        assert!(c["name"].is_string());
        assert!(c["tolerance"].is_number());
        assert!(c["measured"].is_number());
        assert!(c["pass"].is_boolean());
    }
    let failed = report["failed"].as_u64().unwrap();
    assert_eq!(o.status.code(), Some(if failed == 0 { 0 } else { 1 }));
    let names: Vec<&str> = checks.iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"series_vs_talbot"));
    assert!(names.contains(&"round_trip_step"));
}
