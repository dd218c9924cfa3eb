use std::process::Command;

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bandchol-bench"))
}

#[test]
fn writes_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let status = bench()
        .args(["--dim", "200", "--bandwidths", "6,10", "--impls", "blocked-serial", "--reps", "1", "--check"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let records = bandchol_bench::parse_csv(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(records.len(), 2);
    assert!(records.iter().all(|r| r.residual.unwrap() <= 1e-10 && r.gflops.unwrap() > 0.0));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["--dim", "10", "--bandwidths", "12"],
        vec!["--dim", "100", "--bandwidths", "4", "--grid-dim", "4"],
        vec!["--dim", "100", "--bandwidths", "4", "--impls", "cholmod"],
        vec!["--dim", "100", "--bandwidths", "4", "--backend", "mkl"],
        vec!["--bandwidths", "4"],
    ] {
        let status = bench().args(&args).output().unwrap().status;
        assert_eq!(status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn injected_fault_exits_1() {
    let out = bench()
        .args(["--dim", "100", "--bandwidths", "4", "--reps", "1", "--check", "--inject-fault"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds"));
}

#[test]
fn trace_flag_writes_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.jsonl");
    let status = bench()
        .args(["--dim", "30", "--bandwidths", "4", "--impls", "blocked-serial", "--reps", "1", "--grid-dim", "3"])
        .arg("--trace")
        .arg(&trace)
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let text = std::fs::read_to_string(trace).unwrap();
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["start_ns"].as_u64().unwrap() <= v["end_ns"].as_u64().unwrap());
    }
    assert!(text.lines().count() > 30);
}
