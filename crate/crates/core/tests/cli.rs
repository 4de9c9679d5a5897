use std::process::Command;

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_icn5gc"))
}

#[test]
fn run_bundled_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (trace, metrics, report) = (dir.path().join("t"), dir.path().join("m"), dir.path().join("r"));
    let out = cli()
        .args(["run", "mec_icn", "--trace"])
        .arg(&trace)
        .arg("--metrics")
        .arg(&metrics)
        .arg("--report")
        .arg(&report)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("cache_hits"));
    assert!(std::fs::read_to_string(&trace).unwrap().lines().count() > 100);
    assert!(std::fs::read_to_string(&metrics).unwrap().contains("upstream_fetches"));
    assert!(std::fs::read_to_string(&report).unwrap().starts_with("scenario mec_icn\n"));
}

#[test]
fn cli_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut traces = Vec::new();
    for i in 0..2 {
        let t = dir.path().join(format!("t{i}"));
        let m = dir.path().join(format!("m{i}"));
        let ok = cli().args(["run", "handover", "--trace"]).arg(&t).arg("--metrics").arg(&m).status().unwrap();
        assert!(ok.success());
        traces.push((std::fs::read(t).unwrap(), std::fs::read(m).unwrap()));
    }
    assert_eq!(traces[0], traces[1]);
}

#[test]
fn invalid_input_exits_2() {
    assert_eq!(cli().args(["run", "/no/such/file.scenario"]).status().unwrap().code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.scenario");
    std::fs::write(&bad, "mode = \"handover\"\n[[link]]\na = \"x\"\nb = \"y\"\nlatency_ms = 1\n").unwrap();
    let out = cli().arg("run").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("link[0]"));
}

#[test]
fn horizon_too_short_exits_1() {
    let code = cli().args(["run", "handover", "--max-time", "100"]).status().unwrap().code();
    assert_eq!(code, Some(1));
}

#[test]
fn compare_prints_both_columns() {
    let out = cli().args(["compare", "mec_ip", "mec_icn"]).output().unwrap();
    assert!(out.status.success());
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.lines().next().unwrap().contains("mec_ip") && s.contains("mec_icn") && s.contains("delta"));
}

#[test]
fn generate_round_trips() {
    let out = cli().args(["generate", "--mode", "icn-mec", "--vehicles", "4"]).output().unwrap();
    assert!(out.status.success());
    let cfg = icn5gc::scenario::parse_scenario(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(cfg.with_role(icn5gc::engine::Role::Ue).len(), 4);
    let bad = cli().args(["generate", "--mode", "handover"]).output().unwrap();
    assert!(!bad.status.success());
}
