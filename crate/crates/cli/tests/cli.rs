use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn claimsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_claimsim")).args(args).output().unwrap()
}

fn simulate(dir: &Path, preset: &str, seed: &str) -> Output {
    let out = claimsim(&["simulate", "--preset", preset, "--seed", seed, "--out", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn simulate_writes_every_file() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "default", "3");
    for f in [
        "claims.csv",
        "payments.csv",
        "manifest.json",
        "config.toml",
        "triangle.csv",
        "reserve_report.csv",
        "dependency_table.csv",
        "devpattern.csv",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let header = fs::read_to_string(dir.path().join("payments.csv")).unwrap();
    assert!(header.starts_with(
        "claim_id,payment_no,inter_partial_delay,epoch,capped_epoch,payment_period,development_period,amount_constant,amount_inflated\n"
    ));
    let manifest = fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("\"master_seed\": 3"));
}

#[test]
fn same_seed_same_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    simulate(a.path(), "simple", "9");
    let out = claimsim(&["simulate", "--preset", "simple", "--seed", "9", "--threads", "3", "--out", b.path().to_str().unwrap()]);
    assert!(out.status.success());
    for f in ["claims.csv", "payments.csv", "config.toml", "triangle.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn report_triangle_and_depend_read_a_run() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "default", "4");
    let d = dir.path().to_str().unwrap();

    let report = stdout(&claimsim(&["report", "--in", d]));
    assert_eq!(report.lines().count(), 16, "{report}");
    assert!(report.lines().last().unwrap().starts_with("Total,"));
    let grouped = stdout(&claimsim(&["report", "--in", d, "--grouping", "1-20,21-40"]));
    assert_eq!(grouped.lines().count(), 4, "{grouped}");

    let yearly = stdout(&claimsim(&["triangle", "--in", d, "--factor", "4", "--kind", "cum"]));
    assert_eq!(yearly.lines().count(), 11);
    assert!(yearly.starts_with("cum,1,2,3"));
    let tail = stdout(&claimsim(&["triangle", "--in", d, "--full", "--mode", "tail"]));
    assert!(tail.lines().next().unwrap().ends_with(",tail"));

    let depend = stdout(&claimsim(&["depend", "--in", d]));
    assert!(depend.contains("no claims"));
    assert!(depend.starts_with("size_of_payment_m,m=1,m=2,m=3,m=5,m=7,m=9"));
}

#[test]
fn chainladder_reads_emitted_and_hand_written_triangles() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "default", "5");
    let tri = dir.path().join("past.csv");
    fs::write(&tri, stdout(&claimsim(&["triangle", "--in", dir.path().to_str().unwrap()]))).unwrap();
    let out = stdout(&claimsim(&["chainladder", "--triangle", tri.to_str().unwrap()]));
    assert_eq!(out.lines().count(), 42);

    let small = dir.path().join("small.csv");
    fs::write(&small, "cum,1,2,3\n1,100,150,165\n2,120,180,\n3,140,,\n").unwrap();
    let out = stdout(&claimsim(&["chainladder", "--triangle", small.to_str().unwrap()]));
    let total: f64 = out.lines().last().unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!((total - 109.0).abs() < 1e-9, "{out}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[global]\ntime_unit = 0.25\n").unwrap();
    let out = claimsim(&["simulate", "--config", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("global.I"));

    assert_eq!(claimsim(&["simulate"]).status.code(), Some(2));
    assert_eq!(claimsim(&["report", "--in", "/nonexistent/run"]).status.code(), Some(4));

    let zero = dir.path().join("zero.csv");
    fs::write(&zero, "cum,1,2\n1,0,1\n2,0,\n").unwrap();
    assert_eq!(claimsim(&["chainladder", "--triangle", zero.to_str().unwrap()]).status.code(), Some(3));
}
