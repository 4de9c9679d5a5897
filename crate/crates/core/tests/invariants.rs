use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use icn5gc::forwarder::FaceKind;
use icn5gc::name::parse_name;
use icn5gc::nodes::Node;
use icn5gc::scenario::{presets, run_scenario, Mode, Simulation};

/// Anchors the data-network router would steer the producer prefix to.
fn routed_anchors(sim: &Simulation) -> Vec<String> {
    let prefix = parse_name("/car/42").unwrap();
    let Some(Node::Router(r)) = sim.network.node(sim.cfg.node_id("router").unwrap()) else {
        panic!("no router")
    };
    r.fw.fib()
        .entries()
        .filter(|e| e.prefix == prefix)
        .filter_map(|e| match r.fw.face_kind(e.next_hop) {
            Some(FaceKind::Link(peer)) => Some(sim.kernel.name(peer).to_string()),
            _ => None,
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn one_anchor_at_every_step_boundary(seed in 0u64..10_000, name in prop::sample::select(vec![
        "handover", "handover_same_ulcl", "handover_colocated",
    ])) {
        let mut cfg = presets::bundled(name).unwrap();
        cfg.seed = seed;
        cfg.randomize_latencies(&mut ChaCha8Rng::seed_from_u64(seed), 1, 30);
        let mut sim = Simulation::new(&cfg);
        let mut seen_steps = 0usize;
        let mut anchors_seen = Vec::new();
        let mut t = 0;
        loop {
            let s = sim.kernel.run_to_quiescence(&mut sim.network, t);
            let log = sim.kernel.control_log();
            let stepped = log.iter().filter(|r| r.step.is_some()).count();
            if stepped != seen_steps {
                seen_steps = stepped;
                let routed = routed_anchors(&sim);
                prop_assert_eq!(routed.len(), 1, "t={} routed to {:?}", t, routed);
                if anchors_seen.last() != Some(&routed[0]) {
                    anchors_seen.push(routed[0].clone());
                }
            }
            if s.quiescent() {
                break;
            }
            t += 1;
            prop_assert!(t < cfg.max_time_ms);
        }
        prop_assert!(seen_steps > 0);
        // the prefix moves at most once, never back
        prop_assert!(anchors_seen.len() <= 2, "{:?}", anchors_seen);
    }

    #[test]
    fn mec_accounting(n in 1usize..25, seed in any::<u64>()) {
        let icn = run_scenario(&presets::mec_config(Mode::IcnMec, n, seed)).report;
        let ip = run_scenario(&presets::mec_config(Mode::IpMec, n, seed)).report;
        prop_assert!(icn.quiescent && ip.quiescent);
        prop_assert!(icn.inconsistencies().is_empty(), "{:?}", icn.inconsistencies());
        prop_assert!(ip.inconsistencies().is_empty(), "{:?}", ip.inconsistencies());
        prop_assert_eq!(icn.get("requests_served"), n as u64);
        prop_assert_eq!(ip.get("requests_served"), n as u64);
        prop_assert_eq!(icn.get("upstream_fetches"), 1);
        prop_assert_eq!(ip.get("upstream_fetches"), n as u64);
        prop_assert_eq!(ip.get("dns_lookups"), n as u64);
    }

    #[test]
    fn reruns_match(seed in any::<u64>(), n in 1usize..6) {
        let mut cfg = presets::mec_config(Mode::IcnMec, n, seed);
        cfg.randomize_latencies(&mut ChaCha8Rng::seed_from_u64(seed), 1, 20);
        let a = run_scenario(&cfg);
        let b = run_scenario(&cfg);
        prop_assert_eq!(a.trace_text(), b.trace_text());
        prop_assert_eq!(a.metrics, b.metrics);
    }
}
