use std::collections::{BTreeMap, BTreeSet};

use crate::control::{ControlBody, ControlMessage, SessionKind, SliceId};
use crate::engine::{Action, Kernel, Message, Payload, Role, SimTime, Timer};
use crate::forwarder::{FaceId, FaceKind, Forwarder, ForwarderActions, ForwarderRole};
use crate::name::Name;
use crate::packet::{Addr, Data, IcnPdu, Inner, Interest, IpBody, IpPacket, NodeId, SessionId};

use super::{first_with_role, ip_packet, note_forwarding, request, send_ctl, unexpected, NodeSetup};

const MAX_RETRIES: u32 = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UeSession {
    pub id: SessionId,
    pub kind: SessionKind,
    pub addr: Addr,
    pub anchor: NodeId,
}

#[derive(Debug, Clone)]
struct Outstanding {
    started: SimTime,
    attempt: u32,
}

/// Vehicle or handset: ICN consumer/producer over its PDU session, or a
/// plain IP client.
#[derive(Debug, Clone)]
pub struct UeNode {
    pub fw: Forwarder,
    local: FaceId,
    home_ran: Option<NodeId>,
    pub serving_ran: Option<NodeId>,
    prefix: Option<Name>,
    kind: SessionKind,
    slice_hint: Option<SliceId>,
    payload_size: u32,
    dns: Option<Addr>,
    pub icn_authorized: Option<bool>,
    pub sessions: Vec<UeSession>,
    pub refused: Option<String>,
    queued: Vec<Name>,
    nonce: u64,
    pending: BTreeMap<Name, Outstanding>,
    next_id: u64,
    ip_pending: BTreeMap<u64, (String, SimTime)>,
    awaiting_dns: BTreeMap<String, Vec<u64>>,
    peers: BTreeSet<Addr>,
}

impl UeNode {
    pub fn new(setup: &NodeSetup) -> Self {
        let mut fw = Forwarder::new(ForwarderRole::Endpoint, 0);
        let local = fw.add_face(FaceKind::LocalApp);
        Self {
            fw,
            local,
            home_ran: setup.ran,
            serving_ran: None,
            prefix: setup.prefix.clone(),
            kind: setup.session_kind,
            slice_hint: setup.slice_hint.clone(),
            payload_size: setup.payload_size,
            dns: setup.dns,
            icn_authorized: None,
            sessions: Vec::new(),
            refused: None,
            queued: Vec::new(),
            nonce: (setup.id.0 as u64) << 40,
            pending: BTreeMap::new(),
            next_id: (setup.id.0 as u64) << 32,
            ip_pending: BTreeMap::new(),
            awaiting_dns: BTreeMap::new(),
            peers: BTreeSet::new(),
        }
    }

    pub fn outstanding(&self) -> usize {
        self.pending.len() + self.ip_pending.len()
    }

    pub fn handle(&mut self, k: &mut Kernel, me: NodeId, payload: Payload) {
        match payload {
            Payload::Action(a) => self.action(k, me, a),
            Payload::Deliver { from, msg, .. } => match msg {
                Message::Control(c) => self.control(k, me, c),
                Message::Radio { inner: Inner::Icn(pdu), .. } => self.icn_from_ran(k, me, from, pdu),
                Message::Radio { inner: Inner::Ip(pkt), .. } => self.ip(k, me, pkt),
                other => unexpected(k, me, &other.describe()),
            },
            Payload::Timer(Timer::InterestTimeout { name, attempt }) => self.interest_timeout(k, me, name, attempt),
            Payload::Timer(Timer::RequestTimeout { id, .. }) => {
                if let Some((object, _)) = self.ip_pending.remove(&id) {
                    k.inc("requests_lost", me, 1);
                    k.trace_line(me, &format!("app timeout {object}"));
                }
            }
            Payload::Timer(Timer::PitExpiry) => super::expire_pit(k, me, &mut self.fw),
            other => unexpected(k, me, other.kind()),
        }
    }

    fn action(&mut self, k: &mut Kernel, me: NodeId, a: Action) {
        match a {
            Action::UeAttach => match self.home_ran {
                Some(ran) => {
                    self.serving_ran = Some(ran);
                    request(k, me, ran, None, ControlBody::RrcSetup);
                }
                None => unexpected(k, me, "attach without ran"),
            },
            Action::Request { object } => {
                if self.sessions.is_empty() {
                    self.queued.push(object);
                } else {
                    self.request(k, me, object);
                }
            }
            Action::TriggerHandover { target_ran } => match (self.serving_ran, self.sessions.is_empty()) {
                (Some(ran), false) => {
                    let body = ControlBody::HandoverRequest {
                        target_ran,
                        sessions: self.sessions.iter().map(|s| s.id).collect(),
                        names: self.prefix.iter().cloned().collect(),
                    };
                    k.record(me, "handover_start", k.name(target_ran).to_string(), 0);
                    request(k, me, ran, Some(1), body);
                }
                _ => unexpected(k, me, "handover without session"),
            },
            Action::Detach => {
                if let Some(ran) = self.serving_ran.take() {
                    send_ctl(k, me, ran, 0, None, ControlBody::RrcRelease);
                }
            }
            other => unexpected(k, me, &other.describe()),
        }
    }

    fn control(&mut self, k: &mut Kernel, me: NodeId, c: ControlMessage) {
        match &c.body {
            ControlBody::RrcSetupComplete => {
                let face = self.fw.add_face(FaceKind::Link(c.sender));
                self.fw.fib_mut().set_default(Some(face));
                if let Some(amf) = first_with_role(k, Role::Amf) {
                    let body = ControlBody::RegistrationRequest {
                        ran: c.sender,
                        prefix: self.prefix.clone(),
                    };
                    request(k, me, amf, None, body);
                }
            }
            ControlBody::RegistrationAccept { icn_authorized } => {
                self.icn_authorized = Some(*icn_authorized);
                let (Some(ran), Some(amf)) = (self.serving_ran, first_with_role(k, Role::Amf)) else {
                    return;
                };
                let body = ControlBody::SessionEstablishRequest {
                    ue: me,
                    kind: self.kind,
                    slice_hint: self.slice_hint.clone(),
                    slice: None,
                    ran,
                    prefix: self.prefix.clone(),
                };
                request(k, me, amf, None, body);
            }
            ControlBody::SessionEstablishAccept { path, kind } => {
                self.sessions.push(UeSession {
                    id: path.session,
                    kind: *kind,
                    addr: path.ue_addr,
                    anchor: path.anchor,
                });
                k.record(me, "session_up", path.session.to_string(), 0);
                if let Some(prefix) = self.prefix.clone() {
                    if *kind == SessionKind::Icn {
                        self.fw.fib_mut().insert(prefix, self.local, 0);
                    } else {
                        self.register_name(k, me, path.ue_addr);
                    }
                }
                for object in std::mem::take(&mut self.queued) {
                    self.request(k, me, object);
                }
            }
            ControlBody::SessionEstablishReject { reason } => {
                self.refused = Some(reason.clone());
                k.inc_cause("session_refusals", me, reason);
                let dropped = self.queued.len() as u64;
                self.queued.clear();
                if dropped > 0 {
                    k.inc("requests_refused", me, dropped);
                }
            }
            // step 9: reprogram the default route and confirm at the target
            ControlBody::HandoverAck { target_ran, path } => {
                let face = self.fw.add_face(FaceKind::Link(*target_ran));
                self.fw.fib_mut().set_default(Some(face));
                self.serving_ran = Some(*target_ran);
                send_ctl(k, me, *target_ran, c.corr, Some(10), ControlBody::HandoverConfirm);
                let mut changed = None;
                if let Some(s) = self.sessions.iter_mut().find(|s| s.id == path.session) {
                    s.anchor = path.anchor;
                    if path.addr_changed && s.addr != path.ue_addr {
                        changed = Some((s.addr, path.ue_addr, s.kind));
                        s.addr = path.ue_addr;
                    }
                }
                if let Some((_, new, SessionKind::Ip)) = changed {
                    self.register_name(k, me, new);
                    let name = self.prefix.as_ref().map(|p| p.to_string()).unwrap_or_default();
                    for peer in self.peers.clone() {
                        let pkt = ip_packet(new, peer, IpBody::SessionRestart { name: name.clone(), addr: new });
                        self.uplink(k, me, Inner::Ip(pkt));
                    }
                }
            }
            ControlBody::HandoverReject { reason } => {
                k.trace_line(me, &format!("handover rejected: {reason}"));
            }
            _ => unexpected(k, me, c.tag()),
        }
    }

    fn register_name(&mut self, k: &mut Kernel, me: NodeId, addr: Addr) {
        if let (Some(prefix), Some(dns)) = (&self.prefix, self.dns) {
            let pkt = ip_packet(addr, dns, IpBody::DnsRegister { name: prefix.to_string(), addr });
            self.uplink(k, me, Inner::Ip(pkt));
        }
    }

    fn session(&self) -> Option<&UeSession> {
        self.sessions.first()
    }

    fn uplink(&mut self, k: &mut Kernel, me: NodeId, inner: Inner) {
        self.radio(k, me, self.serving_ran, inner);
    }

    fn radio(&mut self, k: &mut Kernel, me: NodeId, ran: Option<NodeId>, inner: Inner) {
        let (Some(ran), Some(session)) = (ran, self.session().map(|s| s.id)) else {
            k.inc_cause("drops", me, "no-session");
            return;
        };
        if k.send(me, ran, Message::Radio { ue: me, session, inner }).is_err() {
            k.inc_cause("drops", me, "no-link");
        }
    }

    fn request(&mut self, k: &mut Kernel, me: NodeId, object: Name) {
        let kind = self.session().map(|s| s.kind).unwrap_or(self.kind);
        match kind {
            SessionKind::Icn => self.send_interest(k, me, object, 0),
            SessionKind::Ip => {
                let id = self.next_id;
                self.next_id += 1;
                self.ip_pending.insert(id, (object.to_string(), k.now()));
                let service = service_name(&object);
                let waiting = self.awaiting_dns.entry(service.clone()).or_default();
                waiting.push(id);
                if waiting.len() == 1 {
                    match (self.dns, self.session().map(|s| s.addr)) {
                        (Some(dns), Some(src)) => {
                            let pkt = ip_packet(src, dns, IpBody::DnsQuery { name: service });
                            self.uplink(k, me, Inner::Ip(pkt));
                        }
                        _ => k.inc_cause("drops", me, "no-resolver"),
                    }
                }
                k.set_timer(me, crate::packet::DEFAULT_INTEREST_LIFETIME_MS, Timer::RequestTimeout { id, attempt: 0 });
            }
        }
    }

    fn send_interest(&mut self, k: &mut Kernel, me: NodeId, name: Name, attempt: u32) {
        self.nonce += 1;
        let interest = Interest::new(name.clone(), self.nonce);
        let lifetime = interest.lifetime_ms;
        let started = self.pending.get(&name).map(|o| o.started).unwrap_or(k.now());
        self.pending.insert(name.clone(), Outstanding { started, attempt });
        k.set_timer(me, lifetime, Timer::InterestTimeout { name: name.clone(), attempt });
        match self.fw.process_interest(interest, self.local, k.now()) {
            Ok(actions) => {
                note_forwarding(k, me, &self.fw, "Interest", &name, self.local, &actions, lifetime);
                self.emit(k, me, actions);
            }
            Err(e) => k.trace_line(me, &format!("app drop {name} {e}")),
        }
    }

    fn interest_timeout(&mut self, k: &mut Kernel, me: NodeId, name: Name, attempt: u32) {
        if self.pending.get(&name).is_none_or(|o| o.attempt != attempt) {
            return;
        }
        k.inc("interests_lost", me, 1);
        if attempt < MAX_RETRIES {
            k.inc("retransmissions", me, 1);
            self.send_interest(k, me, name, attempt + 1);
        } else {
            self.pending.remove(&name);
            k.trace_line(me, &format!("app gave up {name}"));
        }
    }

    fn icn_from_ran(&mut self, k: &mut Kernel, me: NodeId, ran: NodeId, pdu: IcnPdu) {
        let face = self.fw.add_face(FaceKind::Link(ran));
        let name = pdu.name().clone();
        let kind = pdu.kind();
        let now = k.now();
        let actions = match pdu {
            IcnPdu::Interest(i) => {
                let lifetime = i.lifetime_ms;
                match self.fw.process_interest(i, face, now) {
                    Ok(a) => {
                        note_forwarding(k, me, &self.fw, kind, &name, face, &a, lifetime);
                        a
                    }
                    Err(e) => {
                        k.inc_cause("drops", me, "duplicate-nonce");
                        k.trace_line(me, &format!("pkt drop {kind} {name} {e}"));
                        return;
                    }
                }
            }
            IcnPdu::Data(d) => self.fw.process_data(d, face, now),
            IcnPdu::Nack(n) => self.fw.process_nack(n, face, now),
        };
        if !matches!(kind, "Interest") {
            note_forwarding(k, me, &self.fw, kind, &name, face, &actions, 0);
        }
        self.emit(k, me, actions);
    }

    /// Radio emissions go out as-is; local ones feed the producer or the
    /// consumer application.
    fn emit(&mut self, k: &mut Kernel, me: NodeId, actions: ForwarderActions) {
        let mut work = vec![actions];
        while let Some(actions) = work.pop() {
            for e in actions.emissions {
                match self.fw.face_kind(e.face) {
                    Some(FaceKind::Link(ran)) => self.radio(k, me, Some(ran), Inner::Icn(e.pdu)),
                    Some(FaceKind::LocalApp) => match e.pdu {
                        IcnPdu::Interest(i) => {
                            k.inc("upstream_fetches", me, 1);
                            let data = Data {
                                name: i.name,
                                payload_size: self.payload_size,
                                producer_id: me,
                                signed: true,
                            };
                            work.push(self.fw.process_data(data, self.local, k.now()));
                        }
                        IcnPdu::Data(d) => self.consumed(k, me, &d.name),
                        IcnPdu::Nack(n) => {
                            k.trace_line(me, &format!("app nack {}", n.name));
                        }
                    },
                    _ => k.inc_cause("drops", me, "unknown-face"),
                }
            }
        }
    }

    fn consumed(&mut self, k: &mut Kernel, me: NodeId, name: &Name) {
        match self.pending.remove(name) {
            Some(o) => {
                k.inc("requests_served", me, 1);
                k.record(me, "latency", name.to_string(), k.now() - o.started);
            }
            None => k.inc("duplicate_deliveries", me, 1),
        }
    }

    fn ip(&mut self, k: &mut Kernel, me: NodeId, pkt: IpPacket) {
        match pkt.body {
            IpBody::DnsAnswer { name, addr } => {
                let ids = self.awaiting_dns.remove(&name).unwrap_or_default();
                let (Some(dst), Some(src)) = (addr, self.session().map(|s| s.addr)) else {
                    k.inc_cause("drops", me, "unresolved");
                    return;
                };
                for id in ids {
                    if let Some((object, _)) = self.ip_pending.get(&id) {
                        let body = IpBody::Request { object: object.clone(), id };
                        self.uplink(k, me, Inner::Ip(ip_packet(src, dst, body)));
                    }
                }
            }
            IpBody::Response { id, object } => match self.ip_pending.remove(&id) {
                Some((_, started)) => {
                    k.inc("requests_served", me, 1);
                    k.record(me, "latency", object, k.now() - started);
                }
                None => k.inc("duplicate_deliveries", me, 1),
            },
            // acting as a producer reachable by address
            IpBody::Request { object, id } => {
                k.inc("upstream_fetches", me, 1);
                self.peers.insert(pkt.tuple.src_addr);
                let src = self.session().map(|s| s.addr).unwrap_or(pkt.tuple.dst_addr);
                let reply = ip_packet(src, pkt.tuple.src_addr, IpBody::Response { object, id });
                self.uplink(k, me, Inner::Ip(reply));
            }
            other => unexpected(k, me, other.kind()),
        }
    }

    pub fn dump(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(ran) = self.serving_ran {
            out.push(format!("serving {ran}"));
        }
        for s in &self.sessions {
            out.push(format!("session {} {:?} addr={} anchor={}", s.id, s.kind, s.addr, s.anchor));
        }
        if let Some(r) = &self.refused {
            out.push(format!("refused {r}"));
        }
        out.push(format!("outstanding {}", self.outstanding()));
        out.extend(self.fw.dump());
        out
    }
}

/// DNS service name of an object: its first two components.
pub(crate) fn service_name(object: &Name) -> String {
    object.prefix(object.len().min(2)).to_string()
}
