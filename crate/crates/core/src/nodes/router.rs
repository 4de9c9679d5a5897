use crate::control::ControlBody;
use crate::engine::{Kernel, Message, Payload, Timer};
use crate::forwarder::{FaceKind, Forwarder, ForwarderRole};
use crate::packet::{IcnPdu, NodeId};

use super::{emit_links, expire_pit, note_forwarding, reply, route_ip, unexpected, NodeSetup};

/// Router inside the ICN data network.
#[derive(Debug, Clone)]
pub struct RouterNode {
    pub fw: Forwarder,
}

impl RouterNode {
    pub fn new(setup: &NodeSetup) -> Self {
        let mut fw = Forwarder::new(ForwarderRole::Router, setup.cs_capacity);
        for (prefix, next) in &setup.routes {
            let face = fw.add_face(FaceKind::Link(*next));
            fw.fib_mut().insert(prefix.clone(), face, 0);
        }
        Self { fw }
    }

    pub fn handle(&mut self, k: &mut Kernel, me: NodeId, payload: Payload) {
        match payload {
            Payload::Deliver { from, msg, .. } => match msg {
                Message::Icn(pdu) => self.icn(k, me, from, pdu),
                Message::Ip(pkt) => route_ip(k, me, pkt),
                Message::Control(c) => match &c.body {
                    ControlBody::RouteUpdate { prefix, next_hop } => {
                        self.fw.fib_mut().remove_prefix(prefix);
                        let face = self.fw.add_face(FaceKind::Link(*next_hop));
                        self.fw.fib_mut().insert(prefix.clone(), face, 0);
                        reply(k, me, &c, ControlBody::RouteAck);
                    }
                    _ => unexpected(k, me, c.tag()),
                },
                other => unexpected(k, me, &other.describe()),
            },
            Payload::Timer(Timer::PitExpiry) => expire_pit(k, me, &mut self.fw),
            other => unexpected(k, me, other.kind()),
        }
    }

    fn icn(&mut self, k: &mut Kernel, me: NodeId, from: NodeId, pdu: IcnPdu) {
        let face = self.fw.add_face(FaceKind::Link(from));
        let name = pdu.name().clone();
        let kind = pdu.kind();
        let now = k.now();
        let (actions, lifetime) = match pdu {
            IcnPdu::Interest(i) => {
                let lifetime = i.lifetime_ms;
                match self.fw.process_interest(i, face, now) {
                    Ok(a) => (a, lifetime),
                    Err(e) => {
                        k.inc_cause("drops", me, "duplicate-nonce");
                        k.trace_line(me, &format!("pkt drop {kind} {name} {e}"));
                        return;
                    }
                }
            }
            IcnPdu::Data(d) => (self.fw.process_data(d, face, now), 0),
            IcnPdu::Nack(n) => (self.fw.process_nack(n, face, now), 0),
        };
        note_forwarding(k, me, &self.fw, kind, &name, face, &actions, lifetime);
        for _ in emit_links(k, me, &self.fw, actions) {
            k.inc_cause("drops", me, "local-face");
        }
    }
}
