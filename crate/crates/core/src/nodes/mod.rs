//! Per-role node behaviour. Every node is a state machine driven by the
//! kernel; nodes only talk to each other through `Kernel::send`.

mod amf;
mod anchor;
mod app;
mod functions;
mod procedure;
mod ran;
mod router;
mod smf;
mod ue;
mod ulcl;

use std::collections::BTreeMap;

use crate::control::{ControlBody, ControlMessage, SessionKind, SliceDescriptor, SliceId, SubscriptionProfile};
use crate::engine::{Event, Handler, Kernel, Labels, Message, Payload, Role};
use crate::forwarder::{FaceId, FaceKind, Forwarder, ForwarderActions, Outcome};
use crate::name::Name;
use crate::packet::{Addr, FiveTuple, IcnPdu, IpBody, IpPacket, NodeId, Protocol};

pub use amf::AmfNode;
pub use anchor::AnchorNode;
pub use app::{AppKind, AppNode, AppSetup};
pub use functions::{IcnAfNode, NrsNode, NssfNode, PcfUdmNode};
pub use ran::RanNode;
pub use router::RouterNode;
pub use smf::{IcnSmfNode, SmfNode};
pub use ue::{UeNode, UeSession};
pub use ulcl::UlClNode;

/// Port used for the IP association of ICN sessions.
pub const ICN_PORT: u16 = 6363;

/// Build-time description of one node.
#[derive(Debug, Clone)]
pub struct NodeSetup {
    pub id: NodeId,
    pub name: String,
    pub role: Role,
    pub cs_capacity: usize,
    /// Refuse every N4/NIcn update (fault injection).
    pub fail_control: bool,
    pub addr: Option<Addr>,
    /// UE: local resolver for IP sessions.
    pub dns: Option<Addr>,
    /// UE: producer prefix and requested session.
    pub prefix: Option<Name>,
    pub session_kind: SessionKind,
    pub slice_hint: Option<SliceId>,
    /// UE: RAN used at attach.
    pub ran: Option<NodeId>,
    /// UE: payload size of produced Data.
    pub payload_size: u32,
    /// Static FIB routes toward neighbours.
    pub routes: Vec<(Name, NodeId)>,
    pub app: Option<AppSetup>,
}

/// Run-wide settings shared by the control functions.
#[derive(Debug, Clone)]
pub struct NetworkConfig {
    pub guard_ms: u64,
    pub slices: Vec<SliceDescriptor>,
    pub profiles: Vec<SubscriptionProfile>,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            guard_ms: 500,
            slices: Vec::new(),
            profiles: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Node {
    Ue(Box<UeNode>),
    Ran(RanNode),
    UlCl(UlClNode),
    Anchor(Box<AnchorNode>),
    Router(RouterNode),
    Amf(AmfNode),
    Smf(SmfNode),
    IcnSmf(IcnSmfNode),
    IcnAf(IcnAfNode),
    Nssf(NssfNode),
    PcfUdm(PcfUdmNode),
    Nrs(NrsNode),
    App(AppNode),
}

impl Node {
    pub fn new(setup: &NodeSetup, cfg: &NetworkConfig) -> Node {
        match setup.role {
            Role::Ue => Node::Ue(Box::new(UeNode::new(setup))),
            Role::Ran => Node::Ran(RanNode::default()),
            Role::UlCl => Node::UlCl(UlClNode::new(setup)),
            Role::IcnAp | Role::Upf => Node::Anchor(Box::new(AnchorNode::new(setup))),
            Role::IcnDnRouter => Node::Router(RouterNode::new(setup)),
            Role::Amf => Node::Amf(AmfNode::new(cfg)),
            Role::Smf => Node::Smf(SmfNode::default()),
            Role::IcnSmf => Node::IcnSmf(IcnSmfNode::new(cfg)),
            Role::IcnAf => Node::IcnAf(IcnAfNode),
            Role::Nssf => Node::Nssf(NssfNode::new(cfg)),
            Role::PcfUdm => Node::PcfUdm(PcfUdmNode::new(cfg)),
            Role::Nrs => Node::Nrs(NrsNode::default()),
            Role::AppServer => Node::App(AppNode::new(setup)),
        }
    }

    fn handle(&mut self, k: &mut Kernel, me: NodeId, payload: Payload) {
        match self {
            Node::Ue(n) => n.handle(k, me, payload),
            Node::Ran(n) => n.handle(k, me, payload),
            Node::UlCl(n) => n.handle(k, me, payload),
            Node::Anchor(n) => n.handle(k, me, payload),
            Node::Router(n) => n.handle(k, me, payload),
            Node::Amf(n) => n.handle(k, me, payload),
            Node::Smf(n) => n.handle(k, me, payload),
            Node::IcnSmf(n) => n.handle(k, me, payload),
            Node::IcnAf(n) => n.handle(k, me, payload),
            Node::Nssf(n) => n.handle(k, me, payload),
            Node::PcfUdm(n) => n.handle(k, me, payload),
            Node::Nrs(n) => n.handle(k, me, payload),
            Node::App(n) => n.handle(k, me, payload),
        }
    }

    /// One line per piece of state, stable order.
    pub fn dump(&self) -> Vec<String> {
        match self {
            Node::Ue(n) => n.dump(),
            Node::Ran(n) => n.dump(),
            Node::UlCl(n) => n.dump(),
            Node::Anchor(n) => n.dump(),
            Node::Router(n) => n.fw.dump(),
            Node::Amf(n) => n.dump(),
            Node::Smf(n) => n.dump(),
            Node::IcnSmf(_) | Node::IcnAf(_) | Node::Nssf(_) | Node::PcfUdm(_) | Node::App(_) => Vec::new(),
            Node::Nrs(n) => n.dump(),
        }
    }

    pub fn forwarder(&self) -> Option<&Forwarder> {
        match self {
            Node::Ue(n) => Some(&n.fw),
            Node::Anchor(n) => Some(&n.state.forwarder),
            Node::Router(n) => Some(&n.fw),
            _ => None,
        }
    }
}

/// All nodes of one simulation.
#[derive(Debug, Clone, Default)]
pub struct Network {
    nodes: BTreeMap<NodeId, Node>,
}

impl Network {
    pub fn insert(&mut self, id: NodeId, node: Node) {
        self.nodes.insert(id, node);
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(&id)
    }

    pub fn node_mut(&mut self, id: NodeId) -> Option<&mut Node> {
        self.nodes.get_mut(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &Node)> {
        self.nodes.iter().map(|(k, v)| (*k, v))
    }

    pub fn dump(&self, k: &Kernel) -> Vec<String> {
        let mut out = Vec::new();
        for (id, node) in &self.nodes {
            for line in node.dump() {
                out.push(format!("state {} {line}", k.name(*id)));
            }
        }
        out
    }
}

impl Handler for Network {
    fn handle(&mut self, k: &mut Kernel, ev: Event) {
        if let Some(node) = self.nodes.get_mut(&ev.target) {
            node.handle(k, ev.target, ev.payload);
        }
    }

    fn digests(&self, k: &Kernel) -> Vec<(String, u64)> {
        self.nodes
            .iter()
            .map(|(id, n)| (k.name(*id).to_string(), fnv1a(n.dump().join("\n").as_bytes())))
            .collect()
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

// ---- helpers shared by the node implementations ----

pub(crate) fn send_ctl(
    k: &mut Kernel,
    from: NodeId,
    to: NodeId,
    corr: u64,
    step: Option<u8>,
    body: ControlBody,
) -> bool {
    let msg = ControlMessage {
        corr,
        step,
        sender: from,
        receiver: to,
        body,
    };
    match k.send(from, to, Message::Control(msg)) {
        Ok(()) => true,
        Err(e) => {
            k.inc_cause("drops", from, "no-link");
            k.trace_line(from, &format!("error {e}"));
            false
        }
    }
}

/// New request with a fresh correlation id. Returns the id, or None when
/// the peer is unreachable.
pub(crate) fn request(k: &mut Kernel, from: NodeId, to: NodeId, step: Option<u8>, body: ControlBody) -> Option<u64> {
    let corr = k.next_corr();
    send_ctl(k, from, to, corr, step, body).then_some(corr)
}

pub(crate) fn reply(k: &mut Kernel, me: NodeId, req: &ControlMessage, body: ControlBody) {
    send_ctl(k, me, req.sender, req.corr, req.step, body);
}

pub(crate) fn first_with_role(k: &Kernel, role: Role) -> Option<NodeId> {
    k.topology().with_role(role).into_iter().next()
}

pub(crate) fn unexpected(k: &mut Kernel, me: NodeId, what: &str) {
    k.inc_cause("drops", me, "unexpected");
    k.trace_line(me, &format!("ignored {what}"));
}

/// Trace record and PIT expiry bookkeeping after a forwarder decision.
pub(crate) fn note_forwarding(k: &mut Kernel, me: NodeId, fw: &Forwarder, pdu_kind: &str, name: &Name, face: FaceId, actions: &ForwarderActions, lifetime: u64) {
    let via = fw.face_kind(face).map(|f| f.to_string()).unwrap_or_else(|| face.to_string());
    k.trace_line(me, &format!("pkt {pdu_kind} {name} in={via} {}", actions.outcome));
    match actions.outcome {
        Outcome::Forwarded { .. } => k.set_timer(me, lifetime, crate::engine::Timer::PitExpiry),
        Outcome::CacheHit => k.inc("cache_hits", me, 1),
        Outcome::NoRoute => k.inc_cause("drops", me, "no-route"),
        Outcome::Unsolicited => k.inc_cause("drops", me, "unsolicited"),
        _ => {}
    }
}

pub(crate) fn expire_pit(k: &mut Kernel, me: NodeId, fw: &mut Forwarder) {
    let now = k.now();
    for name in fw.expire_pit(now) {
        k.inc_cause("drops", me, "pit-expiry");
        k.trace_line(me, &format!("pkt expired {name}"));
    }
}

pub(crate) fn ip_packet(src: Addr, dst: Addr, body: IpBody) -> IpPacket {
    IpPacket {
        tuple: FiveTuple {
            src_addr: src,
            dst_addr: dst,
            src_port: 40000,
            dst_port: 80,
            protocol: Protocol::Tcp,
        },
        payload_size: 200,
        body,
    }
}

/// Native IP hop toward the owner of the destination address.
pub(crate) fn route_ip(k: &mut Kernel, me: NodeId, pkt: IpPacket) {
    let next = k
        .ip_owner(pkt.tuple.dst_addr)
        .and_then(|owner| if owner == me { None } else { k.topology().next_hop(me, owner) });
    match next {
        Some(n) => {
            let _ = k.send(me, n, Message::Ip(pkt));
        }
        None => {
            k.inc_cause("drops", me, "no-ip-route");
            k.trace_line(me, &format!("pkt drop ip {} no-route", pkt.tuple));
        }
    }
}

/// Sends forwarder emissions over native ICN links; tunnel and local faces
/// are handed back to the caller.
pub(crate) fn emit_links(k: &mut Kernel, me: NodeId, fw: &Forwarder, actions: ForwarderActions) -> Vec<(FaceKind, IcnPdu)> {
    let mut rest = Vec::new();
    for e in actions.emissions {
        match fw.face_kind(e.face) {
            Some(FaceKind::Link(peer)) => {
                if k.send(me, peer, Message::Icn(e.pdu)).is_err() {
                    k.inc_cause("drops", me, "no-link");
                }
            }
            Some(kind) => rest.push((kind, e.pdu)),
            None => k.inc_cause("drops", me, "unknown-face"),
        }
    }
    rest
}

pub(crate) fn labels(k: &Kernel, me: NodeId) -> Labels {
    Labels::node(k.name(me))
}
