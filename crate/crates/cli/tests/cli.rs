use std::process::{Command, Output};

fn genfam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_genfam")).args(args).output().expect("binary runs")
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn particle_suite_passes() {
    let out = genfam(&["verify", "--suite", "particle", "--samples", "50"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["config"]["suite"], "particle");
    assert_eq!(report["summary"]["failed"], 0);
    let ids: Vec<&str> = report["checks"].as_array().unwrap().iter().map(|c| c["id"].as_str().unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
}

#[test]
fn csv_report_has_a_row_per_check() {
    let out = genfam(&["verify", "--suite", "bundles", "--samples", "10", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r.len() == 7 && r[5] == "true"));
}

#[test]
fn bad_suite_and_tolerance_are_usage_errors() {
    assert_eq!(genfam(&["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(genfam(&["verify", "--tol", "-1"]).status.code(), Some(2));
    assert_eq!(genfam(&["verify", "--mass", "0"]).status.code(), Some(2));
}

#[test]
fn particle_samples_lie_in_the_dynamics() {
    let out = genfam(&["sample", "--model", "particle", "--count", "10", "--format", "csv"]);
    assert!(out.status.success());
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 10);
    for r in rows {
        assert_eq!(r.len(), 2 + 16);
        assert!(r[1].parse::<f64>().unwrap() <= 1e-10);
    }
}

#[test]
fn zero_samples_give_a_header_only_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let out = genfam(&["sample", "--model", "optics", "--count", "0", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("index,residual,q0"));
}

#[test]
fn unknown_model_is_a_usage_error() {
    assert_eq!(genfam(&["sample", "--model", "boat"]).status.code(), Some(2));
}

#[test]
fn particle_trajectory_is_a_straight_line() {
    let out = genfam(&["trajectory", "--model", "particle", "--p", "1,0,0,0", "--steps", "100", "--format", "csv"]);
    assert!(out.status.success());
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 100);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0], i.to_string());
        let t: f64 = r[2].parse().unwrap();
        assert!((t - 0.1 * i as f64).abs() < 1e-12);
        assert_eq!(&r[3..6], &["0", "0", "0"]);
    }
}

#[test]
fn empty_and_off_shell_trajectories() {
    let out = genfam(&["trajectory", "--model", "particle", "--p", "1,0,0,0", "--steps", "0", "--format", "csv"]);
    assert!(out.status.success());
    assert_eq!(csv_rows(&out).len(), 0);
    let out = genfam(&["trajectory", "--model", "particle", "--p", "0,1,0,0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mass shell"));
}

#[test]
fn light_ray_trajectory_in_json() {
    let out = genfam(&["trajectory", "--model", "optics", "--p", "1,-1,0,0", "--mu", "2", "--steps", "3"]);
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 3);
    assert_eq!(rows[1]["qdot"], serde_json::json!([2.0, 2.0, 0.0, 0.0]));
    let timelike = genfam(&["trajectory", "--model", "optics", "--p", "1,0,0,0"]);
    assert_eq!(timelike.status.code(), Some(2));
}
