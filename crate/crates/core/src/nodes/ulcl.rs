use std::collections::BTreeSet;

use crate::control::{ControlBody, ControlMessage};
use crate::engine::{Kernel, Message, Payload};
use crate::packet::{NodeId, SessionId, TunnelId, TunneledPacket};
use crate::user_plane::UlClState;

use super::{reply, unexpected, NodeSetup};

#[derive(Debug, Clone)]
pub struct UlClNode {
    pub state: UlClState,
    fail_control: bool,
    /// Access tunnels whose RAN endpoint has confirmed them.
    confirmed: BTreeSet<TunnelId>,
}

impl UlClNode {
    pub fn new(setup: &NodeSetup) -> Self {
        Self {
            state: UlClState::default(),
            fail_control: setup.fail_control,
            confirmed: BTreeSet::new(),
        }
    }

    pub fn handle(&mut self, k: &mut Kernel, me: NodeId, payload: Payload) {
        match payload {
            Payload::Deliver {
                msg: Message::Control(c),
                ..
            } => self.control(k, me, c),
            Payload::Deliver {
                msg: Message::Tunnel(tp),
                ..
            } => self.relay(k, me, tp),
            other => unexpected(k, me, other.kind()),
        }
    }

    fn control(&mut self, k: &mut Kernel, me: NodeId, c: ControlMessage) {
        match &c.body {
            ControlBody::N4Update { delta } => {
                let body = if self.fail_control {
                    ControlBody::N4Nack {
                        reason: "refused".into(),
                    }
                } else {
                    match self.state.n4_update(delta) {
                        Ok(()) => {
                            for t in &delta.remove_tunnels {
                                self.confirmed.remove(t);
                            }
                            ControlBody::N4Ack
                        }
                        Err(e) => ControlBody::N4Nack { reason: e.to_string() },
                    }
                };
                reply(k, me, &c, body);
            }
            ControlBody::TunnelSetup { tunnel } => {
                self.confirmed.insert(*tunnel);
                reply(k, me, &c, ControlBody::TunnelSetupAck);
            }
            ControlBody::TunnelRelease { tunnel } => {
                self.confirmed.remove(tunnel);
                reply(k, me, &c, ControlBody::TunnelReleaseAck);
            }
            _ => unexpected(k, me, c.tag()),
        }
    }

    fn relay(&mut self, k: &mut Kernel, me: NodeId, tp: TunneledPacket) {
        let Some(direction) = self.state.direction_of(tp.tunnel_id) else {
            k.inc_cause("drops", me, "unknown-tunnel");
            k.trace_line(me, &format!("pkt drop {} {} unknown-tunnel", tp.tunnel_id, tp.inner.label()));
            return;
        };
        match self.state.classify(&tp.header, direction) {
            Ok(out) => {
                let peer = self.state.tunnels().get(out).map(|i| i.peer).expect("classifier tunnels resolve");
                k.trace_line(
                    me,
                    &format!("pkt {direction} {} {} {}->{}", tp.inner.kind(), tp.inner.label(), tp.tunnel_id, out),
                );
                let fwd = TunneledPacket {
                    tunnel_id: out,
                    header: tp.header,
                    inner: tp.inner,
                };
                if k.send(me, peer, Message::Tunnel(fwd)).is_err() {
                    k.inc_cause("drops", me, "no-link");
                }
            }
            Err(_) => {
                k.inc_cause("drops", me, "no-match");
                k.trace_line(me, &format!("pkt drop {direction} {} {} no-match", tp.inner.kind(), tp.inner.label()));
            }
        }
    }

    pub fn residue(&self, session: SessionId) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.state.rules_for_session(session);
        if n > 0 {
            out.push(format!("{n} rules"));
        }
        for (id, info) in self.state.tunnels().iter() {
            if info.session == Some(session) {
                out.push(format!("tunnel {id}"));
            }
        }
        out
    }

    pub fn dump(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (id, info) in self.state.tunnels().iter() {
            let confirmed = if self.confirmed.contains(&id) { " confirmed" } else { "" };
            out.push(format!("tunnel {id} peer={} {:?}{confirmed}", info.peer, info.side));
        }
        for dir in [crate::packet::Direction::Uplink, crate::packet::Direction::Downlink] {
            for r in self.state.rules(dir) {
                out.push(format!(
                    "rule {dir} prio={} src={} dst={} -> {}",
                    r.priority,
                    r.matcher.src_addr.map(|a| a.to_string()).unwrap_or("*".into()),
                    r.matcher.dst_addr.map(|a| a.to_string()).unwrap_or("*".into()),
                    r.action_tunnel
                ));
            }
        }
        out
    }
}
