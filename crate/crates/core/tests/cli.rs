//! End-to-end runs of the compiled binary.

use std::process::Command;

fn reachstore(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_reachstore"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn reach_reports_exact_counts() {
    let out = reachstore(&[
        "reach",
        "--model",
        "hanoi:3",
        "--threads",
        "4",
        "--table-bits",
        "10",
        "--order",
        "dfs",
        "--lb",
        "static",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("states       27"), "{text}");
    assert!(text.contains("transitions  78"), "{text}");
    assert!(text.contains("deadlocks    0"), "{text}");
}

#[test]
fn reach_writes_a_record() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.csv");
    let out = reachstore(&[
        "reach",
        "--model",
        "phils:3",
        "--table-bits",
        "8",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        reachstore::bench::CSV_HEADER,
        "fixed header"
    );
    let row = lines.next().unwrap();
    assert!(row.starts_with("reach,lockless,1,phils:3,"), "{row}");
}

#[test]
fn bench_fill_emits_csv_table() {
    let out = reachstore(&[
        "bench",
        "fill",
        "--table-bits",
        "12",
        "--vector-len",
        "2",
        "--fill",
        "0.3,0.6",
        "--threads",
        "1,2",
        "--reps",
        "1",
        "--ops",
        "5000",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 5, "{text}");
}

#[test]
fn probe_bounds_prints_exact_analytics() {
    let out = reachstore(&["probe-bounds", "--alpha", "0.9"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("0.9,3.6695389922156068,10"), "{text}");
    let bad = reachstore(&["probe-bounds", "--alpha", "1.5"]);
    assert!(!bad.status.success());
}

#[test]
fn check_protocol_exit_codes() {
    let ok = reachstore(&["check-protocol"]);
    assert!(ok.status.success());
    let text = String::from_utf8(ok.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("ok")).count(), 3);

    let bad = reachstore(&["check-protocol", "--variant", "data-after-done"]);
    assert!(!bad.status.success());
    let text = String::from_utf8(bad.stdout).unwrap();
    assert!(text.contains("violation: IncompleteRead"), "{text}");
    assert!(text.contains("1. "), "numbered trace: {text}");
}
