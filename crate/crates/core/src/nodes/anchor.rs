use crate::control::{ControlBody, ControlMessage};
use crate::engine::{Kernel, Message, Payload, Timer};
use crate::forwarder::FaceKind;
use crate::packet::{Addr, IcnPdu, Inner, IpPacket, NodeId, TunneledPacket, DEFAULT_INTEREST_LIFETIME_MS};
use crate::user_plane::IcnApState;

use super::{emit_links, expire_pit, note_forwarding, reply, route_ip, unexpected, NodeSetup};

/// ICN anchor point or plain IP session anchor.
#[derive(Debug, Clone)]
pub struct AnchorNode {
    pub state: IcnApState,
    pub addr: Option<Addr>,
    fail_control: bool,
}

impl AnchorNode {
    pub fn new(setup: &NodeSetup) -> Self {
        let mut state = IcnApState::new(setup.cs_capacity);
        for (prefix, next) in &setup.routes {
            let face = state.forwarder.add_face(FaceKind::Link(*next));
            state.forwarder.fib_mut().insert(prefix.clone(), face, 0);
        }
        Self {
            state,
            addr: setup.addr,
            fail_control: setup.fail_control,
        }
    }

    pub fn handle(&mut self, k: &mut Kernel, me: NodeId, payload: Payload) {
        match payload {
            Payload::Deliver { from, msg, .. } => match msg {
                Message::Control(c) => self.control(k, me, c),
                Message::Tunnel(tp) => self.from_tunnel(k, me, tp),
                Message::Icn(pdu) => self.from_network(k, me, from, pdu),
                Message::Ip(pkt) => self.ip(k, me, pkt),
                other => unexpected(k, me, &other.describe()),
            },
            Payload::Timer(Timer::PitExpiry) => expire_pit(k, me, &mut self.state.forwarder),
            other => unexpected(k, me, other.kind()),
        }
    }

    fn control(&mut self, k: &mut Kernel, me: NodeId, c: ControlMessage) {
        let body = match &c.body {
            ControlBody::N4Update { .. } | ControlBody::IcnSessionUpdate { .. } if self.fail_control => {
                if matches!(c.body, ControlBody::N4Update { .. }) {
                    ControlBody::N4Nack {
                        reason: "refused".into(),
                    }
                } else {
                    ControlBody::IcnSessionNack {
                        reason: "refused".into(),
                    }
                }
            }
            ControlBody::N4Update { delta } => match self.state.n4_update(delta) {
                Ok(()) => ControlBody::N4Ack,
                Err(e) => ControlBody::N4Nack { reason: e.to_string() },
            },
            ControlBody::IcnSessionUpdate { update } => match self.state.apply_update(update) {
                Ok(()) => ControlBody::IcnSessionAck,
                Err(e) => ControlBody::IcnSessionNack { reason: e.to_string() },
            },
            _ => return unexpected(k, me, c.tag()),
        };
        reply(k, me, &c, body);
    }

    fn from_tunnel(&mut self, k: &mut Kernel, me: NodeId, tp: TunneledPacket) {
        let tunnel = tp.tunnel_id;
        match &tp.inner {
            Inner::Ip(_) => {
                let Inner::Ip(pkt) = tp.inner else { unreachable!() };
                if !self.state.tunnels().contains(tunnel) {
                    k.inc_cause("drops", me, "unknown-tunnel");
                    return;
                }
                route_ip(k, me, pkt);
            }
            Inner::Icn(pdu) => {
                let name = pdu.name().clone();
                let kind = pdu.kind();
                let lifetime = lifetime_of(pdu);
                match self.state.icnap_uplink(tp, k.now()) {
                    Ok(actions) => {
                        let face = self.state.forwarder.face_for(FaceKind::Tunnel(tunnel)).expect("tunnel face");
                        note_forwarding(k, me, &self.state.forwarder, kind, &name, face, &actions, lifetime);
                        self.dispatch(k, me, actions);
                    }
                    Err(e) => {
                        k.inc_cause("drops", me, "anchor");
                        k.trace_line(me, &format!("pkt drop {kind} {name} {e}"));
                    }
                }
            }
        }
    }

    fn from_network(&mut self, k: &mut Kernel, me: NodeId, from: NodeId, pdu: IcnPdu) {
        let name = pdu.name().clone();
        let kind = pdu.kind();
        let lifetime = lifetime_of(&pdu);
        match self.state.from_network(pdu, from, k.now()) {
            Ok(actions) => {
                let face = self.state.forwarder.face_for(FaceKind::Link(from)).expect("link face");
                note_forwarding(k, me, &self.state.forwarder, kind, &name, face, &actions, lifetime);
                self.dispatch(k, me, actions);
            }
            Err(e) => {
                k.inc_cause("drops", me, "anchor");
                k.trace_line(me, &format!("pkt drop {kind} {name} {e}"));
            }
        }
    }

    fn dispatch(&mut self, k: &mut Kernel, me: NodeId, actions: crate::forwarder::ForwarderActions) {
        for (kind, pdu) in emit_links(k, me, &self.state.forwarder, actions) {
            match kind {
                FaceKind::Tunnel(t) => match self.state.encapsulate_dl(Inner::Icn(pdu), t) {
                    Ok(tp) => {
                        let peer = self.state.tunnels().get(t).map(|i| i.peer).expect("known tunnel");
                        let _ = k.send(me, peer, Message::Tunnel(tp));
                    }
                    Err(_) => k.inc_cause("drops", me, "unknown-tunnel"),
                },
                _ => k.inc_cause("drops", me, "local-face"),
            }
        }
    }

    fn ip(&mut self, k: &mut Kernel, me: NodeId, pkt: IpPacket) {
        if self.state.session_for_addr(pkt.tuple.dst_addr).is_some() {
            match self.state.ip_downlink(pkt) {
                Ok(tp) => {
                    let peer = self.state.tunnels().get(tp.tunnel_id).map(|i| i.peer).expect("known tunnel");
                    let _ = k.send(me, peer, Message::Tunnel(tp));
                }
                Err(_) => k.inc_cause("drops", me, "no-match"),
            }
        } else {
            route_ip(k, me, pkt);
        }
    }

    pub fn dump(&self) -> Vec<String> {
        let mut out = self.state.forwarder.dump();
        for (id, info) in self.state.tunnels().iter() {
            out.push(format!("tunnel {id} peer={} {:?}", info.peer, info.side));
        }
        for (s, t) in self.state.dl_sessions() {
            out.push(format!("dl {s} {t}"));
        }
        out.push(format!("poa {}", self.state.anchor_role()));
        out
    }
}

fn lifetime_of(pdu: &IcnPdu) -> u64 {
    match pdu {
        IcnPdu::Interest(i) => i.lifetime_ms,
        _ => DEFAULT_INTEREST_LIFETIME_MS,
    }
}
