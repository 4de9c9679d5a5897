//! Acceptance suite. Runs every criterion, prints one line each and exits
//! non-zero if any failed.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use icn5gc::engine::{Action, Role};
use icn5gc::forwarder::{FaceId, FaceKind, Forwarder, ForwarderError, ForwarderRole, ForwardingLabel, Outcome};
use icn5gc::name::{parse_name, Name};
use icn5gc::nodes::Node;
use icn5gc::packet::{Data, IcnPdu, Interest, NodeId};
use icn5gc::scenario::{presets, run_scenario, Mode, ScenarioConfig, Simulation};

type Check = fn() -> Result<String, String>;

fn main() -> ExitCode {
    let criteria: [(u8, &str, Check); 9] = [
        (1, "handover golden step sequence", handover_golden),
        (2, "make-before-break over 100 randomized runs", make_before_break),
        (3, "old path fully cleaned after step 12", cleanup_completeness),
        (4, "edge caching vs unicast fetch counts", mec_caching),
        (5, "session continuity across anchor change", session_continuity),
        (6, "same-UL-CL and co-located variants beat the baseline", variants_beat_baseline),
        (7, "forwarder properties, 10000 cases", forwarder_properties),
        (8, "byte-identical reruns", determinism),
        (9, "unauthorized UE gets no ICN service", authorization),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, title, check) in criteria {
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("criterion {id}: PASS  {title} ({detail})"),
            Err(why) => {
                failed += 1;
                println!("criterion {id}: FAIL  {title}: {why}");
            }
        }
    }
    let _ = panic::take_hook();
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

fn ensure(cond: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(why())
    }
}

fn bundled(name: &str) -> ScenarioConfig {
    presets::bundled(name).unwrap_or_else(|| panic!("no bundled scenario {name}"))
}

fn run(cfg: &ScenarioConfig) -> Simulation {
    let mut sim = Simulation::new(cfg);
    let summary = sim.run();
    assert!(summary.quiescent(), "{} did not quiesce", cfg.name);
    sim
}

fn id(sim: &Simulation, name: &str) -> NodeId {
    sim.cfg.node_id(name).unwrap_or_else(|| panic!("no node {name}"))
}

fn consumer_outstanding(sim: &Simulation, name: &str) -> usize {
    match sim.network.node(id(sim, name)) {
        Some(Node::App(a)) => a.outstanding(),
        _ => panic!("{name} is not an application"),
    }
}

/// `step sender receiver message` for every step-tagged control message,
/// in delivery order.
fn step_lines(sim: &Simulation) -> Vec<String> {
    sim.kernel
        .control_log()
        .iter()
        .filter_map(|r| {
            r.step.map(|s| {
                format!("{s} {} {} {}", sim.kernel.name(r.sender), sim.kernel.name(r.receiver), r.tag)
            })
        })
        .collect()
}

// ---- 1 ----

fn handover_golden() -> Result<String, String> {
    let golden: Vec<String> = include_str!("golden/handover_steps.txt").lines().map(str::to_string).collect();
    let sim = run(&bundled("handover"));
    let got = step_lines(&sim);
    if got != golden {
        let at = got.iter().zip(&golden).position(|(a, b)| a != b).unwrap_or(got.len().min(golden.len()));
        return Err(format!(
            "sequence differs at line {}: got {:?}, want {:?}",
            at + 1,
            got.get(at),
            golden.get(at)
        ));
    }
    let steps: Vec<u8> = got.iter().map(|l| l.split(' ').next().unwrap().parse().unwrap()).collect();
    ensure(steps.windows(2).all(|w| w[0] <= w[1]), || "step tags out of order".into())?;
    let distinct: BTreeSet<u8> = steps.iter().copied().collect();
    ensure(distinct == (1..=12).collect(), || format!("steps present: {distinct:?}"))?;
    let lost = sim.kernel.metrics.total("interests_lost");
    ensure(lost == 0, || format!("interests_lost = {lost}"))?;
    Ok(format!("{} messages, interests_lost = 0", got.len()))
}

// ---- 2 and 3 ----

fn randomized_handover(seed: u64) -> Simulation {
    let mut cfg = bundled("handover");
    cfg.seed = seed;
    cfg.randomize_latencies(&mut ChaCha8Rng::seed_from_u64(seed), 1, 50);
    // Slow links stretch session establishment well past the bundled
    // timeline; start the stream once the prefix is reachable and move
    // while it is still running.
    for a in &mut cfg.actions {
        match a.action {
            Action::StartConsumer => a.at = 3000,
            Action::TriggerHandover { .. } => a.at = 3600,
            _ => {}
        }
    }
    run(&cfg)
}

const RUNS: u64 = 100;

fn make_before_break() -> Result<String, String> {
    let mut violations = Vec::new();
    for seed in 0..RUNS {
        let sim = randomized_handover(seed);
        let log = sim.kernel.control_log();
        let step6_done = log.iter().filter(|r| r.step == Some(6)).map(|r| r.delivered).max();
        let release = log.iter().find(|r| r.tag == "ReleaseCommand").map(|r| r.sent);
        match (step6_done, release) {
            (Some(done), Some(rel)) if done < rel => {}
            other => violations.push(format!("seed {seed}: step 6 done / release = {other:?}")),
        }
        let m = &sim.kernel.metrics;
        let count = 100;
        let served = m.total("requests_served");
        let dup = m.total("duplicate_deliveries");
        let lost = m.total("interests_lost");
        let open = consumer_outstanding(&sim, "consumer");
        if served != count || dup != 0 || lost != 0 || open != 0 {
            violations.push(format!("seed {seed}: served {served}/{count}, duplicates {dup}, lost {lost}, open {open}"));
        }
        if m.total("handovers_completed") != 1 {
            violations.push(format!("seed {seed}: handover did not complete"));
        }
    }
    ensure(violations.is_empty(), || format!("{} violations, first: {}", violations.len(), violations[0]))?;
    Ok(format!("{RUNS} runs, 0 violations"))
}

fn cleanup_completeness() -> Result<String, String> {
    let mut residue = Vec::new();
    let mut runs = 0;
    for seed in 0..RUNS {
        let sim = randomized_handover(seed);
        residue.extend(sim.sweep().into_iter().map(|r| format!("seed {seed}: {r}")));
        runs += 1;
    }
    for name in ["handover", "handover_same_ulcl", "handover_colocated", "handover_ip"] {
        let sim = run(&bundled(name));
        ensure(sim.kernel.metrics.total("handovers_completed") == 1, || format!("{name}: no completed handover"))?;
        residue.extend(sim.sweep().into_iter().map(|r| format!("{name}: {r}")));
        runs += 1;
    }
    ensure(residue.is_empty(), || format!("{} residual entries, first: {}", residue.len(), residue[0]))?;
    Ok(format!("{runs} runs swept clean"))
}

// ---- 4 ----

/// Counts straight from the event trace: Interests/Requests received by the
/// traffic monitor, and vehicle requests the edge anchor answered itself.
struct MecAudit {
    upstream: u64,
    answered_at_edge: u64,
    delivered: BTreeMap<String, u64>,
}

fn audit_mec(trace: &[String], vehicles: usize) -> MecAudit {
    let segment = presets::SEGMENT;
    let mut upstream = 0;
    let mut at_edge_from_tunnel = 0;
    let mut edge_to_monitor = 0;
    let mut delivered = BTreeMap::new();
    for line in trace {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() < 7 || f[3] != "recv" {
            continue;
        }
        let (node, from) = (f[2], f[4].trim_start_matches("from="));
        let rest = &f[5..];
        match (node, rest) {
            ("tm-e", ["icn", "Interest", name]) if *name == segment => upstream += 1,
            ("tm-e", ["ip", "Request", ..]) => upstream += 1,
            ("edge-1", ["tun", _, "Interest", name]) if *name == segment => at_edge_from_tunnel += 1,
            _ => {}
        }
        if node == "tm-e" && from == "edge-1" && rest.first() == Some(&"icn") {
            edge_to_monitor += 1;
        }
        if node.starts_with("car-") && rest.first() == Some(&"radio") && (rest.contains(&"Data") || rest.contains(&"Response")) {
            *delivered.entry(node.to_string()).or_insert(0) += 1;
        }
    }
    let _ = vehicles;
    MecAudit {
        upstream,
        answered_at_edge: at_edge_from_tunnel - edge_to_monitor.min(at_edge_from_tunnel),
        delivered,
    }
}

fn mec_caching() -> Result<String, String> {
    let mut details = Vec::new();
    for n in [2usize, 10, 50] {
        let icn = run_scenario(&presets::mec_config(Mode::IcnMec, n, 7));
        let ip = run_scenario(&presets::mec_config(Mode::IpMec, n, 7));
        let n64 = n as u64;
        let (fetch_icn, hits_icn) = (icn.report.get("upstream_fetches"), icn.report.get("cache_hits"));
        let fetch_ip = ip.report.get("upstream_fetches");
        ensure(fetch_icn == 1 && hits_icn == n64 - 1, || {
            format!("N={n} icn: upstream_fetches {fetch_icn}, cache_hits {hits_icn}")
        })?;
        ensure(fetch_ip == n64 && ip.report.get("cache_hits") == 0, || {
            format!("N={n} ip: upstream_fetches {fetch_ip}")
        })?;

        let a = audit_mec(&icn.trace, n);
        ensure(a.upstream == fetch_icn && a.answered_at_edge == hits_icn, || {
            format!("N={n} icn audit: upstream {} hits {}", a.upstream, a.answered_at_edge)
        })?;
        ensure(a.delivered.len() == n && a.delivered.values().all(|c| *c == 1), || {
            format!("N={n} icn audit: deliveries {:?}", a.delivered)
        })?;
        let b = audit_mec(&ip.trace, n);
        ensure(b.upstream == fetch_ip, || format!("N={n} ip audit: upstream {}", b.upstream))?;
        ensure(b.delivered.len() == n && b.delivered.values().all(|c| *c == 1), || {
            format!("N={n} ip audit: deliveries {:?}", b.delivered)
        })?;
        for r in [&icn.report, &ip.report] {
            let bad = r.inconsistencies();
            ensure(bad.is_empty(), || format!("N={n} {}: {bad:?}", r.name))?;
        }
        details.push(format!("N={n}: icn 1/{}, ip {n}", n - 1));
    }
    Ok(details.join("; "))
}

// ---- 5 ----

fn serving_anchor(sim: &Simulation) -> NodeId {
    let smf = sim.cfg.with_role(Role::Smf)[0];
    match sim.network.node(smf) {
        Some(Node::Smf(s)) => s.records.values().next().expect("one session").serving_icn_ap,
        _ => panic!("no smf"),
    }
}

fn session_continuity() -> Result<String, String> {
    let ip = run(&bundled("handover_ip"));
    let icn = run(&bundled("handover"));
    for (sim, old) in [(&ip, "upf-1"), (&icn, "icn-ap-1")] {
        ensure(serving_anchor(sim) != id(sim, old), || format!("{}: anchor did not change", sim.cfg.name))?;
    }
    let re_ip = ip.kernel.metrics.total("session_reestablishments");
    let re_icn = icn.kernel.metrics.total("session_reestablishments");
    ensure(re_ip == 1 && re_icn == 0, || format!("reestablishments ip {re_ip}, icn {re_icn}"))?;
    let m = &icn.kernel.metrics;
    let (served, lost) = (m.total("requests_served"), m.total("interests_lost"));
    let open = consumer_outstanding(&icn, "consumer");
    ensure(served == 100 && lost == 0 && open == 0, || {
        format!("icn stream: served {served}, lost {lost}, open {open}")
    })?;
    Ok(format!("ip {re_ip}, icn {re_icn}; icn stream 100/100"))
}

// ---- 6 ----

/// Pinned after the first oracle run at 5 ms on every link.
const PINNED_SIGNALING: [(&str, u64); 3] = [("handover", 61), ("handover_same_ulcl", 47), ("handover_colocated", 61)];
const PINNED_DURATION: [(&str, u64); 3] = [("handover", 1175), ("handover_same_ulcl", 605), ("handover_colocated", 1155)];

fn variants_beat_baseline() -> Result<String, String> {
    let mut signaling = BTreeMap::new();
    let mut duration = BTreeMap::new();
    for name in ["handover", "handover_same_ulcl", "handover_colocated"] {
        let mut cfg = bundled(name);
        cfg.set_uniform_latency(5);
        let o = run_scenario(&cfg);
        ensure(o.report.get("handovers_completed") == 1, || format!("{name}: handover incomplete"))?;
        signaling.insert(name, o.report.get("signaling_messages"));
        duration.insert(name, o.report.handover_duration.unwrap_or(u64::MAX));
    }
    ensure(signaling["handover_same_ulcl"] < signaling["handover"], || {
        format!("signaling same-ulcl {} vs baseline {}", signaling["handover_same_ulcl"], signaling["handover"])
    })?;
    ensure(duration["handover_colocated"] < duration["handover"], || {
        format!("duration co-located {} vs baseline {}", duration["handover_colocated"], duration["handover"])
    })?;
    for (name, v) in PINNED_SIGNALING {
        ensure(signaling[name] == v, || format!("{name}: signaling {} != pinned {v}", signaling[name]))?;
    }
    for (name, v) in PINNED_DURATION {
        ensure(duration[name] == v, || format!("{name}: duration {} != pinned {v}", duration[name]))?;
    }
    Ok(format!(
        "signaling {} < {}, duration {} < {} ms",
        signaling["handover_same_ulcl"], signaling["handover"], duration["handover_colocated"], duration["handover"]
    ))
}

// ---- 7 ----

#[derive(Debug, Clone)]
enum Op {
    Interest { name: usize, face: usize, nonce: u64 },
    Data { name: usize },
    Advance(u64),
    Label { prefix: usize, face: usize },
    Unlabel { prefix: usize },
}

#[derive(Debug, Clone)]
struct Instance {
    faces: usize,
    capacity: usize,
    routes: Vec<(usize, usize, u32)>,
    ops: Vec<Op>,
}

/// Up to 20 names in a two-level tree; prefixes are the tree's inner nodes
/// plus the names themselves.
fn universe() -> (Vec<Name>, Vec<Name>) {
    let mut names = Vec::new();
    for a in 0..4 {
        for b in 0..5 {
            names.push(parse_name(&format!("/p{a}/n{b}")).unwrap());
        }
    }
    let mut prefixes: Vec<Name> = (0..4).map(|a| parse_name(&format!("/p{a}")).unwrap()).collect();
    prefixes.extend(names.iter().cloned());
    (names, prefixes)
}

fn instance() -> impl Strategy<Value = Instance> {
    (2usize..=6, 0usize..=6).prop_flat_map(|(faces, capacity)| {
        let op = prop_oneof![
            4 => (0usize..20, 0..faces, 0u64..6).prop_map(|(name, face, nonce)| Op::Interest { name, face, nonce }),
            3 => (0usize..20).prop_map(|name| Op::Data { name }),
            1 => (0u64..3000).prop_map(Op::Advance),
            1 => (0usize..24, 0..faces).prop_map(|(prefix, face)| Op::Label { prefix, face }),
            1 => (0usize..24).prop_map(|prefix| Op::Unlabel { prefix }),
        ];
        (
            Just(faces),
            Just(capacity),
            prop::collection::vec((0usize..24, 0..faces, 0u32..3), 0..8),
            prop::collection::vec(op, 1..40),
        )
            .prop_map(|(faces, capacity, routes, ops)| Instance {
                faces,
                capacity,
                routes,
                ops,
            })
    })
}

/// Reference model: plain vectors and maps, no shared code with the forwarder.
struct Model {
    pending: BTreeMap<Name, (Vec<(usize, u64)>, u64)>,
    lru: Vec<Name>,
    capacity: usize,
    labels: BTreeMap<Name, usize>,
    routes: Vec<(Name, usize, u32)>,
}

impl Model {
    fn longest<'a, T>(&self, name: &Name, table: impl Iterator<Item = (&'a Name, T)>) -> Option<(usize, T)> {
        table
            .filter(|(p, _)| p.is_prefix_of(name))
            .map(|(p, v)| (p.len(), v))
            .fold(None, |best: Option<(usize, T)>, (len, v)| match best {
                Some((l, _)) if l >= len => best,
                _ => Some((len, v)),
            })
    }

    fn next_hop(&self, name: &Name) -> Option<(usize, bool)> {
        if let Some((_, face)) = self.longest(name, self.labels.iter().map(|(p, f)| (p, *f))) {
            return Some((face, true));
        }
        let best_len = self.longest(name, self.routes.iter().map(|(p, f, c)| (p, (*f, *c))))?.0;
        self.routes
            .iter()
            .filter(|(p, _, _)| p.is_prefix_of(name) && p.len() == best_len)
            .map(|(_, f, c)| (*c, *f))
            .min()
            .map(|(_, f)| (f, false))
    }

    fn touch(&mut self, name: &Name) {
        self.lru.retain(|n| n != name);
        self.lru.push(name.clone());
    }
}

fn check_instance(inst: &Instance) -> Result<(), TestCaseError> {
    let (names, prefixes) = universe();
    let mut fw = Forwarder::new(ForwarderRole::Anchor, inst.capacity);
    let faces: Vec<FaceId> = (0..inst.faces).map(|i| fw.add_face(FaceKind::Link(NodeId(100 + i as u32)))).collect();
    let mut model = Model {
        pending: BTreeMap::new(),
        lru: Vec::new(),
        capacity: inst.capacity,
        labels: BTreeMap::new(),
        routes: Vec::new(),
    };
    for (p, f, c) in &inst.routes {
        let prefix = prefixes[*p].clone();
        if model.routes.iter().any(|(q, g, _)| *q == prefix && g == f) {
            continue;
        }
        fw.fib_mut().insert(prefix.clone(), faces[*f], *c);
        model.routes.push((prefix, *f, *c));
    }
    let face_index = |id: FaceId| faces.iter().position(|f| *f == id).expect("known face");
    let mut now = 0u64;
    // upstream Interests per name within the current pending window
    let mut window_upstream: BTreeMap<Name, u32> = BTreeMap::new();

    for op in &inst.ops {
        match op {
            Op::Advance(d) => now += d,
            Op::Label { prefix, face } => {
                let p = prefixes[*prefix].clone();
                fw.install_forwarding_label(ForwardingLabel {
                    covered_prefix: p.clone(),
                    target_anchor: NodeId(900),
                    via: faces[*face],
                })
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
                model.labels.insert(p, *face);
            }
            Op::Unlabel { prefix } => {
                let p = &prefixes[*prefix];
                let removed = fw.remove_forwarding_label(p).is_ok();
                prop_assert_eq!(removed, model.labels.remove(p).is_some());
            }
            Op::Interest { name, face, nonce } => {
                let name = names[*name].clone();
                let interest = Interest::new(name.clone(), *nonce);
                let lifetime = interest.lifetime_ms;
                let got = fw.process_interest(interest, faces[*face], now);
                if model.lru.contains(&name) {
                    let a = got.map_err(|e| TestCaseError::fail(e.to_string()))?;
                    prop_assert_eq!(a.outcome, Outcome::CacheHit);
                    prop_assert_eq!(a.emissions.len(), 1);
                    prop_assert_eq!(a.emissions[0].face, faces[*face]);
                    model.touch(&name);
                    continue;
                }
                let live = model.pending.get(&name).is_some_and(|(_, exp)| *exp > now);
                if !live {
                    model.pending.remove(&name);
                    window_upstream.remove(&name);
                }
                if let Some((down, exp)) = model.pending.get_mut(&name) {
                    if down.iter().any(|(_, n)| n == nonce) {
                        let duplicate = matches!(got, Err(ForwarderError::DuplicateNonce { .. }));
                        prop_assert!(duplicate);
                    } else {
                        let a = got.map_err(|e| TestCaseError::fail(e.to_string()))?;
                        prop_assert_eq!(a.outcome, Outcome::Aggregated);
                        prop_assert!(a.emissions.is_empty());
                        down.push((*face, *nonce));
                        *exp = (*exp).max(now + lifetime);
                    }
                    continue;
                }
                let a = got.map_err(|e| TestCaseError::fail(e.to_string()))?;
                match model.next_hop(&name) {
                    Some((out, via_label)) => {
                        prop_assert_eq!(a.outcome, Outcome::Forwarded { via_label });
                        prop_assert_eq!(a.emissions.len(), 1);
                        prop_assert_eq!(face_index(a.emissions[0].face), out);
                        prop_assert!(matches!(a.emissions[0].pdu, IcnPdu::Interest(_)));
                        model.pending.insert(name.clone(), (vec![(*face, *nonce)], now + lifetime));
                        let up = window_upstream.entry(name.clone()).or_insert(0);
                        *up += 1;
                        prop_assert_eq!(*up, 1, "second upstream Interest in one pending window");
                    }
                    None => {
                        prop_assert_eq!(a.outcome, Outcome::NoRoute);
                        prop_assert!(matches!(a.emissions[..], [ref e] if matches!(e.pdu, IcnPdu::Nack(_))));
                    }
                }
            }
            Op::Data { name } => {
                let name = names[*name].clone();
                let data = Data {
                    name: name.clone(),
                    payload_size: 10,
                    producer_id: NodeId(1),
                    signed: true,
                };
                let a = fw.process_data(data, faces[0], now);
                window_upstream.remove(&name);
                match model.pending.remove(&name) {
                    Some((down, exp)) if exp > now => {
                        prop_assert_eq!(a.outcome, Outcome::Satisfied);
                        let mut want: Vec<usize> = Vec::new();
                        for (f, _) in down {
                            if !want.contains(&f) {
                                want.push(f);
                            }
                        }
                        let got: Vec<usize> = a.emissions.iter().map(|e| face_index(e.face)).collect();
                        prop_assert_eq!(got, want);
                        if model.capacity > 0 {
                            if !model.lru.contains(&name) && model.lru.len() == model.capacity {
                                model.lru.remove(0);
                            }
                            model.touch(&name);
                        }
                    }
                    _ => {
                        prop_assert_eq!(a.outcome, Outcome::Unsolicited);
                        prop_assert!(a.emissions.is_empty());
                    }
                }
            }
        }
        prop_assert!(fw.cs().len() <= inst.capacity);
        prop_assert_eq!(&fw.cs().names_by_recency(), &model.lru);
    }
    Ok(())
}

fn forwarder_properties() -> Result<String, String> {
    let cases = 10_000;
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&instance(), |inst| check_instance(&inst))
        .map_err(|e| e.to_string())?;
    Ok(format!("{cases} cases, 0 violations"))
}

// ---- 8 ----

fn determinism() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut checked = 0;
    for (name, _) in presets::BUNDLED {
        let cfg = bundled(name);
        let mut files = Vec::new();
        for round in 0..2 {
            let o = run_scenario(&cfg);
            let trace = dir.path().join(format!("{name}.{round}.trace"));
            let metrics = dir.path().join(format!("{name}.{round}.metrics"));
            std::fs::write(&trace, o.trace_text()).map_err(|e| e.to_string())?;
            std::fs::write(&metrics, &o.metrics).map_err(|e| e.to_string())?;
            files.push((std::fs::read(&trace).unwrap(), std::fs::read(&metrics).unwrap()));
        }
        ensure(files[0] == files[1], || format!("{name}: reruns differ"))?;
        ensure(!files[0].0.is_empty(), || format!("{name}: empty trace"))?;
        checked += 1;
    }
    Ok(format!("{checked} bundled scenarios"))
}

// ---- 9 ----

fn authorization() -> Result<String, String> {
    let mut cfg = bundled("mec_icn");
    for p in &mut cfg.profiles {
        p.icn_service_enabled = false;
    }
    let o = run_scenario(&cfg);
    let vehicles = cfg.with_role(Role::Ue).len() as u64;
    let refused = o.report.get("session_refusals");
    ensure(refused == vehicles, || format!("{refused} of {vehicles} establishments refused"))?;
    let icn_kinds = ["Interest", "Data", "Nack"];
    let on_tunnel: Vec<&String> = o
        .trace
        .iter()
        .filter(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            f.get(3) == Some(&"recv") && f.get(5) == Some(&"tun") && f.get(7).is_some_and(|k| icn_kinds.contains(k))
        })
        .collect();
    ensure(on_tunnel.is_empty(), || format!("ICN PDU on a tunnel: {}", on_tunnel[0]))?;
    let any_tunnel = o.trace.iter().any(|l| l.split_whitespace().nth(5) == Some("tun"));
    ensure(!any_tunnel, || "tunnel traffic without a session".into())?;
    ensure(o.report.get("requests_served") == 0, || "unauthorized requests were served".into())?;
    Ok(format!("{refused} refusals, 0 ICN PDUs on tunnels"))
}
