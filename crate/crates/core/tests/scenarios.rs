use std::path::Path;

use icn5gc::engine::Role;
use icn5gc::nodes::Node;
use icn5gc::scenario::{
    emit_report, load_scenario, parse_scenario, presets, render_comparison, run_handover_scenario, run_mec_scenario,
    run_scenario, Mode, ScenarioError, Simulation,
};

fn fixture(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.scenario"))
}

#[test]
fn fixtures_load_from_disk() {
    for (name, _) in presets::BUNDLED {
        let cfg = load_scenario(fixture(name)).unwrap();
        assert_eq!(cfg.name, name);
    }
    assert_eq!(load_scenario(fixture("handover")).unwrap().mode, Mode::Handover);
    assert_eq!(load_scenario(fixture("mec_icn")).unwrap().mode, Mode::IcnMec);
}

#[test]
fn missing_file_is_io_error() {
    assert!(matches!(load_scenario("/no/such.scenario"), Err(ScenarioError::Io { .. })));
}

const MINIMAL: &str = r#"
mode = "icn-mec"
[[node]]
name = "a"
role = "icn-dn-router"
[[node]]
name = "b"
role = "icn-dn-router"
"#;

#[test]
fn undefined_node_in_link() {
    let text = format!("{MINIMAL}[[link]]\na = \"a\"\nb = \"ghost\"\nlatency_ms = 1\n");
    match parse_scenario(&text) {
        Err(ScenarioError::Validation { location, message }) => {
            assert_eq!(location, "link[0].b");
            assert!(message.contains("ghost"), "{message}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn negative_latency() {
    let text = format!("{MINIMAL}[[link]]\na = \"a\"\nb = \"b\"\nlatency_ms = -3\n");
    match parse_scenario(&text) {
        Err(ScenarioError::Validation { location, .. }) => assert_eq!(location, "link[0].latency_ms"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn undefined_node_in_action() {
    let text = format!("{MINIMAL}[[action]]\nat_ms = 5\nnode = \"nobody\"\ndo = \"ue_attach\"\n");
    assert!(matches!(parse_scenario(&text), Err(ScenarioError::Validation { .. })));
}

#[test]
fn malformed_toml_reports_position() {
    let text = "mode = \"handover\"\n[[node]]\nname = \"a\"\nrole = \n";
    match parse_scenario(text) {
        Err(ScenarioError::Parse { line, .. }) => assert!(line >= 4, "line {line}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unknown_field_is_rejected() {
    let text = format!("{MINIMAL}colour = \"red\"\n");
    assert!(parse_scenario(&text).is_err());
}

#[test]
fn single_vehicle_is_served_both_ways() {
    for mode in [Mode::IcnMec, Mode::IpMec] {
        let r = run_mec_scenario(&presets::mec_config(mode, 1, 3)).unwrap();
        assert!(r.quiescent);
        assert_eq!(r.get("requests_served"), 1, "{mode}");
        assert_eq!(r.get("upstream_fetches"), 1, "{mode}");
        assert_eq!(r.get("cache_hits"), 0, "{mode}");
        assert!(r.inconsistencies().is_empty());
    }
}

#[test]
fn ip_mode_pays_a_lookup_per_request() {
    let r = run_mec_scenario(&presets::mec_config(Mode::IpMec, 7, 3)).unwrap();
    assert_eq!(r.get("dns_lookups"), 7);
    let icn = run_mec_scenario(&presets::mec_config(Mode::IcnMec, 7, 3)).unwrap();
    assert_eq!(icn.get("dns_lookups"), 0);
    let mean = |l: &[u64]| l.iter().sum::<u64>() as f64 / l.len() as f64;
    assert!(mean(&icn.latencies) < mean(&r.latencies));
}

#[test]
fn cache_hits_grow_with_fleet_size() {
    let hits: Vec<u64> = [1, 3, 8, 20]
        .into_iter()
        .map(|n| run_mec_scenario(&presets::mec_config(Mode::IcnMec, n, 11)).unwrap().get("cache_hits"))
        .collect();
    assert!(hits.windows(2).all(|w| w[0] < w[1]), "{hits:?}");
}

#[test]
fn wrong_mode_is_refused() {
    let cfg = presets::bundled("handover").unwrap();
    assert!(matches!(run_mec_scenario(&cfg), Err(ScenarioError::WrongMode { .. })));
    let cfg = presets::bundled("mec_ip").unwrap();
    assert!(matches!(run_handover_scenario(&cfg), Err(ScenarioError::WrongMode { .. })));
}

#[test]
fn unwritable_records_path() {
    let r = run_scenario(&presets::mec_config(Mode::IcnMec, 2, 1)).report;
    let mut out = Vec::new();
    let err = emit_report(&r, &mut out, Some(Path::new("/no/such/dir/report.txt"))).unwrap_err();
    assert!(matches!(err, ScenarioError::Io { .. }));
}

#[test]
fn records_round_trip_counters() {
    let r = run_scenario(&presets::bundled("mec_icn").unwrap()).report;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.txt");
    emit_report(&r, &mut Vec::new(), Some(&path)).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    for (name, v) in &r.counters {
        assert!(text.contains(&format!("counter {name} {v}\n")));
    }
}

#[test]
fn comparison_delta_is_b_minus_a() {
    let a = run_scenario(&presets::bundled("mec_ip").unwrap()).report;
    let b = run_scenario(&presets::bundled("mec_icn").unwrap()).report;
    let table = render_comparison(&a, &b);
    let row = table.lines().find(|l| l.starts_with("upstream_fetches")).unwrap();
    let cells: Vec<&str> = row.split_whitespace().collect();
    let (x, y): (i64, i64) = (cells[1].parse().unwrap(), cells[2].parse().unwrap());
    assert_eq!(cells[3], format!("{:+}", y - x));
}

#[test]
fn failed_target_anchor_aborts_and_rolls_back() {
    let text = presets::BUNDLED.iter().find(|(n, _)| *n == "handover").unwrap().1;
    let text = text.replacen(
        "name = \"icn-ap-2\"\nrole = \"icn-ap\"",
        "name = \"icn-ap-2\"\nrole = \"icn-ap\"\nfail_control = true",
        1,
    );
    let cfg = parse_scenario(&text).unwrap();
    let mut sim = Simulation::new(&cfg);
    let summary = sim.run();
    assert!(summary.quiescent());
    let r = sim.report(&summary);
    assert_eq!(r.get("handover_aborts"), 1);
    assert_eq!(r.get("handovers_completed"), 0);
    assert_eq!(r.abort_reasons.len(), 1);

    // still anchored where it started, nothing left at the target
    let smf = cfg.with_role(Role::Smf)[0];
    let Some(Node::Smf(s)) = sim.network.node(smf) else { panic!() };
    let rec = s.records.values().next().unwrap();
    assert_eq!(rec.serving_icn_ap, cfg.node_id("icn-ap-1").unwrap());
    assert_eq!(rec.serving_ran, cfg.node_id("ran-1").unwrap());
    let Some(Node::Anchor(ap2)) = sim.network.node(cfg.node_id("icn-ap-2").unwrap()) else { panic!() };
    assert!(ap2.state.residue(*s.records.keys().next().unwrap(), rec.prefix.as_ref()).is_empty());
    assert!(ap2.state.forwarder.labels().next().is_none());
}

#[test]
fn handover_report_has_every_step() {
    let r = run_handover_scenario(&presets::bundled("handover").unwrap()).unwrap();
    let steps: Vec<u8> = r.steps.iter().map(|s| s.step).collect();
    assert_eq!(steps, (1..=12).collect::<Vec<_>>());
    assert!(r.steps.windows(2).all(|w| w[0].first_sent <= w[1].first_sent));
    assert_eq!(r.get("handovers_completed"), 1);
    assert!(r.handover_duration.unwrap() >= 500, "guard interval is part of the handover");
}
