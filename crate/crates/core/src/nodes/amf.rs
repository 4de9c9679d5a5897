use std::collections::BTreeMap;

use crate::control::{amf_register_ue, ControlBody, ControlMessage, PathInfo, SessionKind, UeContext};
use crate::engine::{Kernel, Message, Payload, Role, Timer};
use crate::packet::{NodeId, SessionId};

use super::{first_with_role, reply, request, send_ctl, unexpected, NetworkConfig};

/// What a correlation id issued by the AMF is waiting for.
#[derive(Debug, Clone)]
enum Waiting {
    Subscription { ue_req: ControlMessage },
    SliceSelect { ue_req: ControlMessage },
    Smf { ue_req: ControlMessage },
    ResourceSetup { ue_req: ControlMessage, path: PathInfo, kind: SessionKind },
    SmContext { ue: NodeId },
    PathSwitch { ue: NodeId },
    Release { ue: NodeId },
    Complete { ue: NodeId },
}

#[derive(Debug, Clone)]
struct Handover {
    /// Correlation id of the UE's HandoverRequest; closed by step 9.
    ue_corr: u64,
    source_ran: NodeId,
    target_ran: NodeId,
    session: SessionId,
    path: Option<PathInfo>,
}

#[derive(Debug, Clone)]
pub struct AmfNode {
    guard_ms: u64,
    pub contexts: BTreeMap<NodeId, UeContext>,
    waiting: BTreeMap<u64, Waiting>,
    handovers: BTreeMap<NodeId, Handover>,
}

impl AmfNode {
    pub fn new(cfg: &NetworkConfig) -> Self {
        Self {
            guard_ms: cfg.guard_ms,
            contexts: BTreeMap::new(),
            waiting: BTreeMap::new(),
            handovers: BTreeMap::new(),
        }
    }

    pub fn handle(&mut self, k: &mut Kernel, me: NodeId, payload: Payload) {
        match payload {
            Payload::Deliver {
                msg: Message::Control(c),
                ..
            } => self.control(k, me, c),
            Payload::Timer(Timer::ReleaseGuard { ue }) => self.release_source(k, me, ue),
            other => unexpected(k, me, other.kind()),
        }
    }

    fn control(&mut self, k: &mut Kernel, me: NodeId, c: ControlMessage) {
        match &c.body {
            ControlBody::RegistrationRequest { .. } => match first_with_role(k, Role::PcfUdm) {
                Some(udm) => {
                    if let Some(corr) = request(k, me, udm, None, ControlBody::SubscriptionQuery { ue: c.sender }) {
                        self.waiting.insert(corr, Waiting::Subscription { ue_req: c });
                    }
                }
                None => {
                    let (ctx, _) = amf_register_ue(c.sender, c.sender, None, None);
                    self.contexts.insert(c.sender, ctx);
                    reply(k, me, &c, ControlBody::RegistrationAccept { icn_authorized: false });
                }
            },
            ControlBody::SessionEstablishRequest { ue, kind, slice_hint, .. } => {
                let Some(ctx) = self.contexts.get(ue) else {
                    let reason = "not registered".to_string();
                    return reply(k, me, &c, ControlBody::SessionEstablishReject { reason });
                };
                if *kind == SessionKind::Icn && !ctx.icn_authorized {
                    let reason = "icn not authorized".to_string();
                    return reply(k, me, &c, ControlBody::SessionEstablishReject { reason });
                }
                let body = ControlBody::SliceSelectRequest {
                    ue: *ue,
                    hint: slice_hint.clone(),
                    allowed: ctx.allowed_slices.iter().cloned().collect(),
                };
                match first_with_role(k, Role::Nssf).and_then(|nssf| request(k, me, nssf, None, body)) {
                    Some(corr) => {
                        self.waiting.insert(corr, Waiting::SliceSelect { ue_req: c });
                    }
                    None => {
                        let reason = "no slice selector".to_string();
                        reply(k, me, &c, ControlBody::SessionEstablishReject { reason });
                    }
                }
            }
            ControlBody::HandoverRequired {
                ue,
                target_ran,
                sessions,
                ..
            } => self.handover_required(k, me, &c, *ue, *target_ran, sessions),
            ControlBody::HandoverNotify { ue } => {
                let ue = *ue;
                if let Some(ho) = self.handovers.get(&ue) {
                    if let Some(ctx) = self.contexts.get_mut(&ue) {
                        ctx.serving_ran = ho.target_ran;
                    }
                    // hold the source path a little longer for in-flight data
                    k.set_timer(me, self.guard_ms, Timer::ReleaseGuard { ue });
                }
            }
            _ => match self.waiting.remove(&c.corr) {
                Some(w) => self.resume(k, me, w, c),
                None => unexpected(k, me, c.tag()),
            },
        }
    }

    fn resume(&mut self, k: &mut Kernel, me: NodeId, w: Waiting, c: ControlMessage) {
        match (w, c.body) {
            (Waiting::Subscription { ue_req }, ControlBody::SubscriptionResponse { profile }) => {
                let ControlBody::RegistrationRequest { ran, prefix } = &ue_req.body else {
                    unreachable!("registration waits only on registration requests")
                };
                let (ctx, outcome) = amf_register_ue(ue_req.sender, *ran, prefix.clone(), profile.as_ref());
                k.trace_line(me, &format!("registered {} {outcome:?}", k.name(ue_req.sender)));
                let icn_authorized = ctx.icn_authorized;
                self.contexts.insert(ue_req.sender, ctx);
                reply(k, me, &ue_req, ControlBody::RegistrationAccept { icn_authorized });
            }
            (Waiting::SliceSelect { ue_req }, ControlBody::SliceSelectResponse { slice }) => {
                let Some(slice) = slice else {
                    let reason = "no slice".to_string();
                    return reply(k, me, &ue_req, ControlBody::SessionEstablishReject { reason });
                };
                let mut body = ue_req.body.clone();
                if let ControlBody::SessionEstablishRequest { slice: s, .. } = &mut body {
                    *s = Some(slice);
                }
                match first_with_role(k, Role::Smf).and_then(|smf| request(k, me, smf, None, body)) {
                    Some(corr) => {
                        self.waiting.insert(corr, Waiting::Smf { ue_req });
                    }
                    None => {
                        let reason = "no session manager".to_string();
                        reply(k, me, &ue_req, ControlBody::SessionEstablishReject { reason });
                    }
                }
            }
            (Waiting::Smf { ue_req }, ControlBody::SessionEstablishAccept { path, kind }) => {
                let ue = ue_req.sender;
                let ran = self.contexts.get(&ue).map(|c| c.serving_ran).unwrap_or(ue);
                let body = ControlBody::SessionResourceSetup {
                    ue,
                    session: path.session,
                    tunnel: path.ran_tunnel,
                    info: path.ran_tunnel_info.clone(),
                };
                if let Some(corr) = request(k, me, ran, None, body) {
                    self.waiting.insert(corr, Waiting::ResourceSetup { ue_req, path, kind });
                }
            }
            (Waiting::Smf { ue_req }, reject @ ControlBody::SessionEstablishReject { .. }) => {
                reply(k, me, &ue_req, reject);
            }
            (Waiting::ResourceSetup { ue_req, path, kind }, ControlBody::SessionResourceSetupAck) => {
                if let Some(ctx) = self.contexts.get_mut(&ue_req.sender) {
                    ctx.sessions.insert(path.session);
                }
                reply(k, me, &ue_req, ControlBody::SessionEstablishAccept { path, kind });
            }
            // step 7 -> 8
            (Waiting::SmContext { ue }, ControlBody::SmContextUpdateAck { result }) => match result {
                Ok(path) => {
                    let Some(ho) = self.handovers.get_mut(&ue) else { return };
                    let body = ControlBody::PathSwitchCommand {
                        ue,
                        session: path.session,
                        tunnel: path.ran_tunnel,
                        info: path.ran_tunnel_info.clone(),
                    };
                    let target = ho.target_ran;
                    ho.path = Some(path);
                    if let Some(corr) = request(k, me, target, Some(8), body) {
                        self.waiting.insert(corr, Waiting::PathSwitch { ue });
                    }
                }
                Err(reason) => self.abort(k, me, ue, reason),
            },
            // step 9: hand the new path to the UE
            (Waiting::PathSwitch { ue }, ControlBody::PathSwitchAck) => {
                let Some(ho) = self.handovers.get(&ue) else { return };
                let Some(path) = ho.path.clone() else { return };
                let body = ControlBody::HandoverAck {
                    target_ran: ho.target_ran,
                    path,
                };
                send_ctl(k, me, ue, ho.ue_corr, Some(9), body);
            }
            // step 11 done -> 12
            (Waiting::Release { ue }, ControlBody::ReleaseComplete) => {
                let Some(ho) = self.handovers.get(&ue) else { return };
                let body = ControlBody::HandoverComplete { ue, session: ho.session };
                if let Some(corr) = first_with_role(k, Role::Smf).and_then(|smf| request(k, me, smf, Some(12), body)) {
                    self.waiting.insert(corr, Waiting::Complete { ue });
                }
            }
            (Waiting::Complete { ue }, ControlBody::HandoverCompleteAck) => {
                if let Some(ho) = self.handovers.remove(&ue) {
                    k.inc("handovers_completed", me, 1);
                    k.record(me, "handover_complete", format!("{} {}", k.name(ue), ho.session), 0);
                }
            }
            (_, body) => unexpected(k, me, body.tag()),
        }
    }

    /// Steps 2 -> 3.
    fn handover_required(
        &mut self,
        k: &mut Kernel,
        me: NodeId,
        c: &ControlMessage,
        ue: NodeId,
        target_ran: NodeId,
        sessions: &[SessionId],
    ) {
        let source_ran = c.sender;
        let session = sessions.first().copied();
        let (Some(session), Some(smf)) = (session, first_with_role(k, Role::Smf)) else {
            let reason = "nothing to hand over".to_string();
            send_ctl(k, me, ue, c.corr, Some(9), ControlBody::HandoverReject { reason });
            return;
        };
        self.handovers.insert(
            ue,
            Handover {
                ue_corr: c.corr,
                source_ran,
                target_ran,
                session,
                path: None,
            },
        );
        let body = ControlBody::SmContextUpdate { ue, session, target_ran };
        match request(k, me, smf, Some(3), body) {
            Some(corr) => {
                self.waiting.insert(corr, Waiting::SmContext { ue });
            }
            None => self.abort(k, me, ue, "session manager unreachable".into()),
        }
    }

    fn abort(&mut self, k: &mut Kernel, me: NodeId, ue: NodeId, reason: String) {
        let Some(ho) = self.handovers.remove(&ue) else { return };
        k.inc("handover_aborts", me, 1);
        k.record(me, "handover_abort", reason.clone(), 0);
        send_ctl(k, me, ue, ho.ue_corr, Some(9), ControlBody::HandoverReject { reason });
    }

    /// Step 11 towards the source, once the guard interval has passed.
    fn release_source(&mut self, k: &mut Kernel, me: NodeId, ue: NodeId) {
        let Some(ho) = self.handovers.get(&ue) else { return };
        let body = ControlBody::ReleaseCommand { ue, session: ho.session };
        if let Some(corr) = request(k, me, ho.source_ran, Some(11), body) {
            self.waiting.insert(corr, Waiting::Release { ue });
        }
    }

    pub fn dump(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (ue, ctx) in &self.contexts {
            let sessions: Vec<String> = ctx.sessions.iter().map(|s| s.to_string()).collect();
            out.push(format!(
                "ue {ue} ran={} icn={} sessions=[{}]",
                ctx.serving_ran,
                ctx.icn_authorized,
                sessions.join(",")
            ));
        }
        for (ue, ho) in &self.handovers {
            out.push(format!("handover {ue} {}->{} {}", ho.source_ran, ho.target_ran, ho.session));
        }
        out
    }
}
