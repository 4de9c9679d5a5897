//! Bundled scenarios and the connected-car generator used to scale them.

use std::fmt::Write as _;

use super::{parse_scenario, Mode, ScenarioConfig};

/// The scenario files shipped with the crate, by file stem.
pub const BUNDLED: [(&str, &str); 6] = [
    ("mec_ip", include_str!("../../scenarios/mec_ip.scenario")),
    ("mec_icn", include_str!("../../scenarios/mec_icn.scenario")),
    ("handover", include_str!("../../scenarios/handover.scenario")),
    ("handover_same_ulcl", include_str!("../../scenarios/handover_same_ulcl.scenario")),
    ("handover_colocated", include_str!("../../scenarios/handover_colocated.scenario")),
    ("handover_ip", include_str!("../../scenarios/handover_ip.scenario")),
];

pub fn bundled(name: &str) -> Option<ScenarioConfig> {
    let text = BUNDLED.iter().find(|(n, _)| *n == name)?.1;
    let mut cfg = parse_scenario(text).expect("bundled scenarios are valid");
    if cfg.name.is_empty() {
        cfg.name = name.to_string();
    }
    Some(cfg)
}

/// Content every vehicle asks for.
pub const SEGMENT: &str = "/traffic/monitor/segment-7";
/// Gap between consecutive vehicle requests.
pub const REQUEST_SPACING_MS: u64 = 100;

/// Connected-car edge scenario: `vehicles` cars behind one radio cell ask
/// the edge traffic monitor for the same road segment, one after another.
/// Sensor data reaches the monitor through the edge/cloud pipeline first.
pub fn mec(mode: Mode, vehicles: usize, seed: u64) -> String {
    assert!(mode != Mode::Handover, "mec preset needs a mec mode");
    let icn = mode == Mode::IcnMec;
    let mut s = String::new();
    let _ = writeln!(s, "name = \"{}\"", if icn { "mec_icn" } else { "mec_ip" });
    let _ = writeln!(s, "mode = \"{mode}\"");
    let _ = writeln!(s, "seed = {seed}");
    let _ = writeln!(s, "control_latency_ms = 2\n");

    let session = if icn { "icn" } else { "ip" };
    for i in 1..=vehicles {
        let _ = writeln!(s, "[[node]]\nname = \"car-{i}\"\nrole = \"ue\"\nran = \"ran-1\"\nsession = \"{session}\"\nslice = \"mec\"");
        if !icn {
            let _ = writeln!(s, "dns = \"10.200.0.53\"");
        }
        s.push('\n');
    }
    let anchor = if icn {
        "[[node]]\nname = \"edge-1\"\nrole = \"icn-ap\"\ncs_capacity = 256\nroutes = [{ prefix = \"/traffic\", via = \"tm-e\" }]\n"
    } else {
        "[[node]]\nname = \"edge-1\"\nrole = \"upf\"\n"
    };
    let _ = writeln!(s, "[[node]]\nname = \"ran-1\"\nrole = \"ran\"\n");
    let _ = writeln!(s, "[[node]]\nname = \"ul-cl-1\"\nrole = \"ul-cl\"\n");
    let _ = writeln!(s, "{anchor}");
    let ip_mode = if icn { "" } else { ", ip_mode = true" };
    let _ = writeln!(
        s,
        "[[node]]\nname = \"tm-e\"\nrole = \"app-server\"\naddr = \"10.200.0.10\"\napp = {{ kind = \"traffic-monitor\"{ip_mode} }}\n"
    );
    let _ = writeln!(
        s,
        "[[node]]\nname = \"tm-c\"\nrole = \"app-server\"\naddr = \"10.200.0.11\"\napp = {{ kind = \"relay\", next = \"tm-e\"{ip_mode} }}\n"
    );
    let _ = writeln!(
        s,
        "[[node]]\nname = \"ts-c\"\nrole = \"app-server\"\naddr = \"10.200.0.12\"\napp = {{ kind = \"relay\", next = \"tm-c\"{ip_mode} }}\n"
    );
    let _ = writeln!(
        s,
        "[[node]]\nname = \"ts-e\"\nrole = \"app-server\"\naddr = \"10.200.0.13\"\napp = {{ kind = \"sensor-edge\", next = \"ts-c\", alg_delay_ms = 1{ip_mode} }}\n"
    );
    if !icn {
        let _ = writeln!(
            s,
            "[[node]]\nname = \"dns\"\nrole = \"app-server\"\naddr = \"10.200.0.53\"\napp = {{ kind = \"dns\", records = [{{ name = \"/traffic/monitor\", addr = \"10.200.0.10\" }}] }}\n"
        );
    }
    let mut control = vec!["amf", "smf", "nssf", "pcf-udm"];
    if icn {
        control.extend(["icn-smf", "nrs"]);
    }
    for c in control {
        let _ = writeln!(s, "[[node]]\nname = \"{c}\"\nrole = \"{c}\"\n");
    }

    for i in 1..=vehicles {
        let _ = writeln!(s, "[[link]]\na = \"car-{i}\"\nb = \"ran-1\"\nlatency_ms = 3\n");
    }
    let mut links = vec![
        ("ran-1", "ul-cl-1", 2),
        ("ul-cl-1", "edge-1", 2),
        ("edge-1", "tm-e", 1),
        ("ts-e", "ts-c", 10),
        ("ts-c", "tm-c", 10),
        ("tm-c", "tm-e", 10),
    ];
    if !icn {
        links.push(("edge-1", "dns", 1));
    }
    for (a, b, l) in links {
        let _ = writeln!(s, "[[link]]\na = \"{a}\"\nb = \"{b}\"\nlatency_ms = {l}\n");
    }

    let _ = writeln!(s, "[[slice]]\nid = \"mec\"\nanchors = [\"edge-1\"]\nulcls = [\"ul-cl-1\"]\n");
    for i in 1..=vehicles {
        let _ = writeln!(
            s,
            "[[subscription]]\nue = \"car-{i}\"\nicn_service_enabled = {icn}\nslices = [\"mec\"]\n"
        );
    }

    let _ = writeln!(s, "[[action]]\nat_ms = 0\nnode = \"ts-e\"\ndo = \"sensor_publish\"\nobject = \"{SEGMENT}\"\nsize = 1200\n");
    for i in 1..=vehicles {
        let _ = writeln!(s, "[[action]]\nat_ms = 0\nnode = \"car-{i}\"\ndo = \"ue_attach\"\n");
    }
    for i in 1..=vehicles {
        let at = 1000 + REQUEST_SPACING_MS * (i as u64 - 1);
        let _ = writeln!(
            s,
            "[[action]]\nat_ms = {at}\nnode = \"car-{i}\"\ndo = \"request\"\nobject = \"{SEGMENT}\"\n"
        );
    }
    s
}

pub fn mec_config(mode: Mode, vehicles: usize, seed: u64) -> ScenarioConfig {
    parse_scenario(&mec(mode, vehicles, seed)).expect("generated scenario is valid")
}
