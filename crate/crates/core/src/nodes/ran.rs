use std::collections::BTreeMap;

use crate::control::{ControlBody, ControlMessage};
use crate::engine::{Kernel, Message, Payload};
use crate::packet::{Inner, NodeId, SessionId, TunneledPacket};
use crate::user_plane::{RanEmission, RanState};

use super::{reply, request, send_ctl, unexpected};

#[derive(Debug, Clone)]
enum Waiting {
    /// TunnelSetup sent on behalf of a path switch.
    PathSwitch(ControlMessage),
    /// TunnelRelease sent on behalf of a release command.
    Release { cmd: ControlMessage, ue: NodeId, session: SessionId },
}

#[derive(Debug, Clone, Default)]
pub struct RanNode {
    pub state: RanState,
    waiting: BTreeMap<u64, Waiting>,
}

impl RanNode {
    pub fn handle(&mut self, k: &mut Kernel, me: NodeId, payload: Payload) {
        match payload {
            Payload::Deliver { msg, .. } => match msg {
                Message::Control(c) => self.control(k, me, c),
                Message::Radio { ue, session, inner } => self.uplink(k, me, ue, session, inner),
                Message::Tunnel(tp) => self.downlink(k, me, tp),
                other => unexpected(k, me, &other.describe()),
            },
            other => unexpected(k, me, other.kind()),
        }
    }

    fn uplink(&mut self, k: &mut Kernel, me: NodeId, ue: NodeId, session: SessionId, inner: Inner) {
        let label = format!("{} {}", inner.kind(), inner.label());
        match self.state.relay_uplink(inner, ue, session) {
            Ok(RanEmission::Tunnel(tp)) => {
                let peer = self.state.tunnels().get(tp.tunnel_id).map(|i| i.peer).expect("known tunnel");
                k.trace_line(me, &format!("pkt UL {label} {}", tp.tunnel_id));
                let _ = k.send(me, peer, Message::Tunnel(tp));
            }
            Ok(_) => {}
            Err(e) => {
                k.inc_cause("drops", me, "ran-uplink");
                k.trace_line(me, &format!("pkt drop UL {label} {e}"));
            }
        }
    }

    fn downlink(&mut self, k: &mut Kernel, me: NodeId, tp: TunneledPacket) {
        let tunnel = tp.tunnel_id;
        let emission = self.state.relay_downlink(tp);
        self.emit(k, me, emission, Some(tunnel));
    }

    fn emit(&mut self, k: &mut Kernel, me: NodeId, e: RanEmission, tunnel: Option<crate::packet::TunnelId>) {
        match e {
            RanEmission::Radio { ue, session, inner } => {
                k.trace_line(me, &format!("pkt DL {} {} radio", inner.kind(), inner.label()));
                let _ = k.send(me, ue, Message::Radio { ue, session, inner });
            }
            RanEmission::Buffered => {
                let t = tunnel.map(|t| t.to_string()).unwrap_or_default();
                k.trace_line(me, &format!("pkt DL buffered {t}"));
            }
            RanEmission::Tunnel(_) => {}
        }
    }

    fn control(&mut self, k: &mut Kernel, me: NodeId, c: ControlMessage) {
        match &c.body {
            ControlBody::RrcSetup => {
                self.state.attach(c.sender);
                reply(k, me, &c, ControlBody::RrcSetupComplete);
            }
            ControlBody::RrcRelease => {
                self.state.detach(c.sender);
            }
            ControlBody::SessionResourceSetup {
                ue,
                session,
                tunnel,
                info,
            } => {
                self.state.install_session(*ue, *session, *tunnel, info.clone());
                reply(k, me, &c, ControlBody::SessionResourceSetupAck);
            }
            // step 1 -> 2: relay to the AMF under the UE's correlation id
            ControlBody::HandoverRequest {
                target_ran,
                sessions,
                names,
            } => {
                if let Some(amf) = super::first_with_role(k, crate::engine::Role::Amf) {
                    let body = ControlBody::HandoverRequired {
                        ue: c.sender,
                        target_ran: *target_ran,
                        sessions: sessions.clone(),
                        names: names.clone(),
                    };
                    send_ctl(k, me, amf, c.corr, Some(2), body);
                }
            }
            // step 8 at the target
            ControlBody::PathSwitchCommand {
                ue,
                session,
                tunnel,
                info,
            } => {
                self.state.install_session(*ue, *session, *tunnel, info.clone());
                let body = ControlBody::TunnelSetup { tunnel: *tunnel };
                match request(k, me, info.peer, c.step, body) {
                    Some(corr) => {
                        self.waiting.insert(corr, Waiting::PathSwitch(c));
                    }
                    None => reply(k, me, &c, ControlBody::PathSwitchAck),
                }
            }
            ControlBody::TunnelSetupAck => {
                if let Some(Waiting::PathSwitch(cmd)) = self.waiting.remove(&c.corr) {
                    reply(k, me, &cmd, ControlBody::PathSwitchAck);
                }
            }
            // step 10: the UE arrives; flush what was held for it
            ControlBody::HandoverConfirm => {
                self.state.attach(c.sender);
                for e in self.state.flush() {
                    self.emit(k, me, e, None);
                }
                if let Some(amf) = super::first_with_role(k, crate::engine::Role::Amf) {
                    send_ctl(k, me, amf, c.corr, Some(11), ControlBody::HandoverNotify { ue: c.sender });
                }
            }
            // step 11 at the source
            ControlBody::ReleaseCommand { ue, session } => {
                let (ue, session) = (*ue, *session);
                let peer = self
                    .state
                    .session_tunnel(ue, session)
                    .and_then(|t| self.state.tunnels().get(t).map(|i| (t, i.peer)));
                match peer {
                    Some((tunnel, peer)) => match request(k, me, peer, c.step, ControlBody::TunnelRelease { tunnel }) {
                        Some(corr) => {
                            self.waiting.insert(corr, Waiting::Release { cmd: c, ue, session });
                        }
                        None => self.release(k, me, c, ue, session),
                    },
                    None => self.release(k, me, c, ue, session),
                }
            }
            ControlBody::TunnelReleaseAck => {
                if let Some(Waiting::Release { cmd, ue, session }) = self.waiting.remove(&c.corr) {
                    self.release(k, me, cmd, ue, session);
                }
            }
            _ => unexpected(k, me, c.tag()),
        }
    }

    fn release(&mut self, k: &mut Kernel, me: NodeId, cmd: ControlMessage, ue: NodeId, session: SessionId) {
        if let Some(t) = self.state.remove_session(ue, session) {
            let dropped = self.state.discard_pending(t);
            if dropped > 0 {
                k.metrics.inc("drops", super::labels(k, me).cause("released"), dropped as u64);
            }
        }
        if !self.state.sessions().any(|((u, _), _)| u == ue) {
            self.state.detach(ue);
        }
        reply(k, me, &cmd, ControlBody::ReleaseComplete);
    }

    pub fn residue(&self, ue: NodeId, session: SessionId) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(t) = self.state.session_tunnel(ue, session) {
            out.push(format!("session tunnel {t}"));
        }
        if self.state.is_attached(ue) {
            out.push("attached".into());
        }
        out
    }

    pub fn dump(&self) -> Vec<String> {
        let mut out: Vec<String> = self.state.attached().map(|u| format!("attached {u}")).collect();
        for ((ue, s), t) in self.state.sessions() {
            out.push(format!("session {ue} {s} {t}"));
        }
        out.push(format!("pending {}", self.state.pending()));
        out
    }
}
