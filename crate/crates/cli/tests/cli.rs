//! End-to-end runs of the `pagani` binary: exit codes, CSV shape, files.

use std::path::Path;
use std::process::{Command, Output};

use pagani_cli::record::{read_records, HEADER};

fn pagani(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pagani")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("pagani-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn integrate_converges_and_exits_zero() {
    let out = pagani(&["integrate", "f3", "3", "1e-3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_records(stdout(&out).as_bytes()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].status, "Converged");
    assert!(rows[0].true_rel_err <= 1e-3);
}

#[test]
fn tolerance_flag_matches_positional() {
    let a = read_records(stdout(&pagani(&["integrate", "f5", "2", "2e-4"])).as_bytes()).unwrap();
    let b = read_records(stdout(&pagani(&["integrate", "f5", "2", "--tau-rel", "2e-4"])).as_bytes()).unwrap();
    assert_eq!(a[0].estimate, b[0].estimate);
    assert_eq!(pagani(&["integrate", "f5", "2", "1e-3", "--tau-rel", "2e-4"]).status.code(), Some(2));
}

#[test]
fn unknown_integrand_is_a_usage_error() {
    assert_eq!(pagani(&["integrate", "f9", "3"]).status.code(), Some(2));
    assert_eq!(pagani(&["integrate", "f4", "7"]).status.code(), Some(2));
    assert_eq!(pagani(&["integrate", "f3", "3", "-1"]).status.code(), Some(2));
    assert_eq!(pagani(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn region_budget_too_small_exits_one() {
    let out = pagani(&["integrate", "f4", "5", "1e-6", "--max-regions", "20000"]);
    assert_eq!(out.status.code(), Some(1));
    let rows = read_records(stdout(&out).as_bytes()).unwrap();
    assert_ne!(rows[0].status, "Converged");
}

#[test]
fn oscillatory_without_filter_runs() {
    let out = pagani(&["integrate", "f1", "8", "1e-3", "--no-rel-filter", "--threads", "2"]);
    assert!(matches!(out.status.code(), Some(0) | Some(1)));
    let rows = read_records(stdout(&out).as_bytes()).unwrap();
    assert!(rows[0].status != "Converged" || rows[0].true_rel_err <= 1e-3);
}

#[test]
fn integrate_writes_to_file() {
    let dir = scratch("out");
    let path = dir.join("one.csv");
    let out = pagani(&["integrate", "f3", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_eq!(read_records(std::fs::File::open(&path).unwrap()).unwrap().len(), 1);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn bench_rows_follow_the_sweep() {
    let out = pagani(&["bench", "--subset", "f3:2,f5:2", "--k-max", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().next().unwrap(), HEADER.join(","));
    let rows = read_records(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 8);
    let taus: Vec<f64> = rows.iter().take(4).map(|r| r.tau_rel).collect();
    assert_eq!(taus, vec![1e-3, 2e-4, 4e-5, 8e-6]);
}

#[test]
fn bench_empty_subset_is_header_only() {
    let out = pagani(&["bench", "--subset", ""]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim_end(), HEADER.join(","));
}

#[test]
fn bench_rejects_large_k_max() {
    assert_eq!(pagani(&["bench", "--subset", "f3:2", "--k-max", "11"]).status.code(), Some(2));
    assert_eq!(pagani(&["bench", "--subset", "f3"]).status.code(), Some(2));
    assert_eq!(pagani(&["bench", "--subset", "f3:2", "--threads", "0"]).status.code(), Some(2));
}

#[test]
fn compare_empty_subset_is_header_only() {
    let out = pagani(&["compare", "--subset", ""]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("driver,integrand_id,"));
}

#[test]
fn compare_pairs_drivers() {
    let out = pagani(&["compare", "--subset", "f3:3,f8:2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("pagani,f3,3,") && lines[1].starts_with("reference,f3,3,"));
    assert!(lines.iter().all(|l| l.ends_with(",true")));
}

#[test]
fn plot_from_bench_output() {
    let dir = scratch("plot");
    let csv = dir.join("bench.csv");
    let out = pagani(&["bench", "--subset", "f3:2", "--k-max", "0", "--out", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let out = pagani(&["plot", csv.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["accuracy.svg", "regions.svg"] {
        assert!(std::fs::read_to_string(dir.join(name)).unwrap().starts_with("<svg"));
    }
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn plot_rejects_empty_or_missing_csv() {
    let dir = scratch("empty");
    let csv = dir.join("empty.csv");
    std::fs::write(&csv, format!("{}\n", HEADER.join(","))).unwrap();
    assert_eq!(pagani(&["plot", csv.to_str().unwrap(), "--out", dir.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&csv, "not,a,bench\n1,2,3\n").unwrap();
    assert_eq!(pagani(&["plot", csv.to_str().unwrap(), "--out", dir.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(pagani(&["plot", "/nonexistent/bench.csv"]).status.code(), Some(2));
    assert!(!Path::new(&dir.join("accuracy.svg")).exists());
    std::fs::remove_dir_all(dir).unwrap();
}
