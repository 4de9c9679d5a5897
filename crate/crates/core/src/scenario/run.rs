use crate::engine::{Kernel, Payload, Role, RunSummary, Topology};
use crate::forwarder::FaceKind;
use crate::nodes::{Network, NetworkConfig, Node};
use crate::packet::NodeId;

use super::report::Report;
use super::{Mode, ScenarioConfig, ScenarioError};

/// A scenario wired into a kernel and its nodes, ready to run.
pub struct Simulation {
    pub cfg: ScenarioConfig,
    pub kernel: Kernel,
    pub network: Network,
}

impl Simulation {
    pub fn new(cfg: &ScenarioConfig) -> Self {
        let mut topology = Topology::default();
        for n in &cfg.nodes {
            topology.add_node(n.id, &n.name, n.role);
        }
        for l in &cfg.links {
            topology.add_link(l.a, l.b, l.link);
        }
        for (role, ms) in &cfg.processing {
            topology.set_processing(*role, *ms);
        }
        let mut kernel = Kernel::new(topology, cfg.seed);
        let net_cfg = NetworkConfig {
            guard_ms: cfg.guard_ms,
            slices: cfg.slices.clone(),
            profiles: cfg.profiles.clone(),
        };
        let mut network = Network::default();
        for n in &cfg.nodes {
            network.insert(n.id, Node::new(n, &net_cfg));
            if let Some(addr) = n.addr {
                kernel.set_ip_route(addr, n.id);
            }
        }
        for a in &cfg.actions {
            kernel
                .schedule(a.at, a.node, Payload::Action(a.action.clone()))
                .expect("clock starts at zero");
        }
        Self {
            cfg: cfg.clone(),
            kernel,
            network,
        }
    }

    pub fn run(&mut self) -> RunSummary {
        self.kernel.run_to_quiescence(&mut self.network, self.cfg.max_time_ms)
    }

    pub fn report(&self, summary: &RunSummary) -> Report {
        Report::collect(&self.cfg, &self.kernel, summary)
    }

    /// State left behind on the old path of every session that completed a
    /// handover. Empty means the move was cleaned up completely.
    pub fn sweep(&self) -> Vec<String> {
        let mut out = Vec::new();
        let Some(Node::Smf(smf)) = self.cfg.with_role(Role::Smf).first().and_then(|id| self.network.node(*id)) else {
            return out;
        };
        for (sid, rec) in smf.records.iter().filter(|(_, r)| r.generation > 0) {
            let chain = [rec.tunnel_chain.ran_ulcl, rec.tunnel_chain.ulcl_ap];
            let name = |id: NodeId| self.kernel.name(id).to_string();
            for (id, node) in self.network.iter() {
                let mut found = Vec::new();
                match node {
                    Node::UlCl(u) if id != rec.serving_ulcl => found = u.residue(*sid),
                    Node::UlCl(u) => {
                        for (t, info) in u.state.tunnels().iter() {
                            if info.session == Some(*sid) && !chain.contains(&t) {
                                found.push(format!("tunnel {t}"));
                            }
                        }
                        for dir in [crate::packet::Direction::Uplink, crate::packet::Direction::Downlink] {
                            for r in u.state.rules(dir) {
                                if r.session == Some(*sid) && !chain.contains(&r.action_tunnel) {
                                    found.push(format!("rule {dir} -> {}", r.action_tunnel));
                                }
                            }
                        }
                    }
                    Node::Anchor(a) if id != rec.serving_icn_ap => {
                        found = a.state.residue(*sid, rec.prefix.as_ref());
                        if let Some(prefix) = &rec.prefix {
                            let fw = &a.state.forwarder;
                            for e in fw.pit().iter().filter(|e| prefix.is_prefix_of(&e.name)) {
                                found.push(format!("pit {}", e.name));
                            }
                            for e in fw.fib().entries().filter(|e| e.prefix == *prefix) {
                                found.push(format!("fib {} via {}", e.prefix, e.next_hop));
                            }
                        }
                    }
                    Node::Anchor(a) => {
                        for (t, info) in a.state.tunnels().iter() {
                            if info.session == Some(*sid) && !chain.contains(&t) {
                                found.push(format!("tunnel {t}"));
                            }
                        }
                    }
                    Node::Ran(r) if id != rec.serving_ran => found = r.residue(rec.ue_id, *sid),
                    Node::Router(r) => {
                        if let Some(prefix) = &rec.prefix {
                            for e in r.fw.fib().entries().filter(|e| e.prefix == *prefix) {
                                if let Some(FaceKind::Link(peer)) = r.fw.face_kind(e.next_hop) {
                                    let role = self.kernel.topology().role(peer);
                                    if role.is_some_and(Role::is_anchor) && peer != rec.serving_icn_ap {
                                        found.push(format!("fib {} -> {}", e.prefix, name(peer)));
                                    }
                                }
                            }
                        }
                    }
                    _ => {}
                }
                out.extend(found.into_iter().map(|f| format!("{} {sid}: {f}", name(id))));
            }
        }
        out
    }
}

/// Everything one run produces.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub summary: RunSummary,
    pub trace: Vec<String>,
    pub metrics: String,
    /// Residue found by [`Simulation::sweep`].
    pub residue: Vec<String>,
}

impl Outcome {
    pub fn trace_text(&self) -> String {
        let mut s = self.trace.join("\n");
        s.push('\n');
        s
    }
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Outcome {
    let mut sim = Simulation::new(cfg);
    let summary = sim.run();
    Outcome {
        report: sim.report(&summary),
        residue: sim.sweep(),
        trace: sim.kernel.trace().to_vec(),
        metrics: sim.kernel.metrics.render(),
        summary,
    }
}

pub fn run_mec_scenario(cfg: &ScenarioConfig) -> Result<Report, ScenarioError> {
    if cfg.mode == Mode::Handover {
        return Err(ScenarioError::WrongMode {
            expected: "ip-mec or icn-mec",
            actual: cfg.mode,
        });
    }
    Ok(run_scenario(cfg).report)
}

pub fn run_handover_scenario(cfg: &ScenarioConfig) -> Result<Report, ScenarioError> {
    if cfg.mode != Mode::Handover {
        return Err(ScenarioError::WrongMode {
            expected: "handover",
            actual: cfg.mode,
        });
    }
    Ok(run_scenario(cfg).report)
}
