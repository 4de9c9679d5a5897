use std::collections::BTreeMap;

use crate::control::{
    nearest, smf_select_target_path, ControlBody, ControlMessage, IcnSmOp, PathInfo, PduSessionRecord, SessionKind,
    SessionState, SliceDescriptor, TunnelChain,
};
use crate::engine::{Kernel, Message, Payload, Role, Timer};
use crate::name::Name;
use crate::packet::{Addr, Direction, FiveTuple, NodeId, Protocol, SessionId, TunnelId, TunnelInfo, TunnelSide};
use crate::user_plane::{AnchorUpdate, FiveTupleMatch, N4Delta, RuleSpec, SessionBinding};

use super::procedure::{Progress, Sequencer, Step};
use super::{first_with_role, reply, unexpected, NetworkConfig, ICN_PORT};

fn n4(delta: N4Delta) -> ControlBody {
    ControlBody::N4Update { delta }
}

fn tunnel_info(peer: NodeId, side: TunnelSide, association: FiveTuple, session: SessionId) -> TunnelInfo {
    TunnelInfo {
        peer,
        side,
        association,
        session: Some(session),
    }
}

fn rules(session: SessionId, addr: Addr, ul: TunnelId, dl: TunnelId, priority: i32) -> Vec<RuleSpec> {
    vec![
        RuleSpec {
            direction: Direction::Uplink,
            matcher: FiveTupleMatch::src(addr),
            action_tunnel: ul,
            priority,
            session: Some(session),
        },
        RuleSpec {
            direction: Direction::Downlink,
            matcher: FiveTupleMatch::dst(addr),
            action_tunnel: dl,
            priority,
            session: Some(session),
        },
    ]
}

fn association(ue_addr: Addr, service_addr: Addr) -> FiveTuple {
    FiveTuple {
        src_addr: ue_addr,
        dst_addr: service_addr,
        src_port: ICN_PORT,
        dst_port: ICN_PORT,
        protocol: Protocol::Udp,
    }
}

/// Address the ICN association of sessions anchored at `anchor` points to.
fn service_addr(anchor: NodeId) -> Addr {
    Addr(0x0AFF_0000 | (anchor.0 & 0xFFFF))
}

/// Target-side plan for a session being moved.
#[derive(Debug, Clone)]
struct Move {
    target_ran: NodeId,
    ulcl: NodeId,
    anchor: NodeId,
    ran_tunnel: TunnelId,
    ap_tunnel: TunnelId,
    ue_addr: Addr,
}

#[derive(Debug, Clone)]
enum Ctx {
    Establish {
        req: ControlMessage,
        record: PduSessionRecord,
        slice: SliceDescriptor,
        path: PathInfo,
    },
    Handover {
        req: ControlMessage,
        session: SessionId,
        path: PathInfo,
    },
    Complete {
        req: ControlMessage,
        session: SessionId,
    },
}

/// Session management: anchor selection, tunnel chain provisioning and the
/// SMF side of the handover.
#[derive(Debug, Clone, Default)]
pub struct SmfNode {
    pub records: BTreeMap<SessionId, PduSessionRecord>,
    slices: BTreeMap<SessionId, SliceDescriptor>,
    moves: BTreeMap<SessionId, Move>,
    pools: BTreeMap<NodeId, u32>,
    seq: Sequencer<Ctx>,
}

impl SmfNode {
    pub fn handle(&mut self, k: &mut Kernel, me: NodeId, payload: Payload) {
        let Payload::Deliver {
            msg: Message::Control(c),
            ..
        } = payload
        else {
            return unexpected(k, me, payload.kind());
        };
        match &c.body {
            ControlBody::SessionEstablishRequest { .. } => self.establish(k, me, c),
            ControlBody::SmContextUpdate { .. } => self.prepare_handover(k, me, c),
            ControlBody::HandoverComplete { .. } => self.complete_handover(k, me, c),
            _ => {
                let progress = self.seq.on_response(k, me, &c);
                self.progress(k, me, progress, &c);
            }
        }
    }

    fn alloc_addr(&mut self, anchor: NodeId) -> Addr {
        let n = self.pools.entry(anchor).or_insert(0);
        *n += 1;
        Addr(0x0A00_0000 | ((anchor.0 & 0xFF) << 16) | *n)
    }

    /// Slice view restricted to anchors that can serve `kind`.
    fn anchors_for(k: &Kernel, slice: &SliceDescriptor, kind: SessionKind) -> SliceDescriptor {
        let want = match kind {
            SessionKind::Icn => Role::IcnAp,
            SessionKind::Ip => Role::Upf,
        };
        let mut s = slice.clone();
        s.icn_ap_candidates.retain(|a| k.topology().role(*a) == Some(want));
        s
    }

    fn establish(&mut self, k: &mut Kernel, me: NodeId, req: ControlMessage) {
        let ControlBody::SessionEstablishRequest {
            ue,
            kind,
            slice: Some(slice),
            ran,
            prefix,
            ..
        } = &req.body
        else {
            let reason = "no slice".to_string();
            return reply(k, me, &req, ControlBody::SessionEstablishReject { reason });
        };
        let (ue, kind, ran, prefix) = (*ue, *kind, *ran, prefix.clone());
        let slice = Self::anchors_for(k, slice, kind);
        let ulcl = nearest(k.topology(), ran, &slice.ulcl_candidates);
        let anchor = ulcl.and_then(|u| nearest(k.topology(), u, &slice.icn_ap_candidates));
        let (Some(ulcl), Some(anchor)) = (ulcl, anchor) else {
            let reason = "no candidate".to_string();
            return reply(k, me, &req, ControlBody::SessionEstablishReject { reason });
        };

        let session = k.alloc_session();
        let t_ran = k.alloc_tunnel();
        let t_ap = k.alloc_tunnel();
        let ue_addr = self.alloc_addr(anchor);
        let service = service_addr(anchor);
        let assoc = association(ue_addr, service);
        let record = PduSessionRecord {
            session_id: session,
            ue_id: ue,
            kind,
            slice_id: slice.slice_id.clone(),
            serving_ran: ran,
            serving_ulcl: ulcl,
            serving_icn_ap: anchor,
            tunnel_chain: TunnelChain {
                ran_ulcl: t_ran,
                ulcl_ap: t_ap,
            },
            ue_addr,
            service_addr: service,
            prefix: prefix.clone(),
            state: SessionState::Establishing,
            generation: 0,
        };
        let path = PathInfo {
            session,
            ran_tunnel: t_ran,
            ran_tunnel_info: tunnel_info(ulcl, TunnelSide::Access, assoc, session),
            ue_addr,
            anchor,
            addr_changed: false,
        };

        let ulcl_delta = N4Delta {
            add_tunnels: vec![
                (t_ran, tunnel_info(ran, TunnelSide::Access, assoc, session)),
                (t_ap, tunnel_info(anchor, TunnelSide::Core, assoc, session)),
            ],
            add_rules: rules(session, ue_addr, t_ap, t_ran, 10),
            ..Default::default()
        };
        let ulcl_undo = N4Delta {
            remove_tunnels: vec![t_ran, t_ap],
            remove_rules_for: vec![session],
            ..Default::default()
        };
        let mut anchor_delta = N4Delta {
            add_tunnels: vec![(t_ap, tunnel_info(ulcl, TunnelSide::Access, assoc, session))],
            ..Default::default()
        };
        if kind == SessionKind::Ip {
            anchor_delta.bind_sessions.push(SessionBinding {
                session,
                dl_tunnel: t_ap,
                ue_addr,
            });
        }
        let anchor_undo = N4Delta {
            remove_tunnels: vec![t_ap],
            unbind_sessions: vec![session],
            ..Default::default()
        };
        let mut steps = vec![
            Step::new(ulcl, None, n4(ulcl_delta)).undo(ulcl, n4(ulcl_undo)),
            Step::new(anchor, None, n4(anchor_delta)).undo(anchor, n4(anchor_undo)),
        ];
        if kind == SessionKind::Icn {
            match first_with_role(k, Role::IcnSmf) {
                Some(icn_smf) => {
                    let op = IcnSmOp::Establish {
                        session,
                        anchor,
                        tunnel: t_ap,
                        prefix,
                    };
                    steps.push(Step::new(icn_smf, None, ControlBody::IcnSmRequest { op }));
                }
                None => {
                    let reason = "no icn session manager".to_string();
                    return reply(k, me, &req, ControlBody::SessionEstablishReject { reason });
                }
            }
        }
        let ctx = Ctx::Establish {
            req: req.clone(),
            record,
            slice,
            path,
        };
        let progress = self.seq.start(k, me, ctx, steps);
        self.progress(k, me, progress, &req);
    }

    /// Steps 3 -> 7.
    fn prepare_handover(&mut self, k: &mut Kernel, me: NodeId, req: ControlMessage) {
        let ControlBody::SmContextUpdate { session, target_ran, .. } = req.body else {
            unreachable!()
        };
        let fail = |k: &mut Kernel, reason: &str| {
            let result = Err(reason.to_string());
            reply(k, me, &req, ControlBody::SmContextUpdateAck { result });
        };
        let (Some(record), Some(slice)) = (self.records.get(&session), self.slices.get(&session)) else {
            return fail(k, "unknown session");
        };
        if record.state != SessionState::Active {
            return fail(k, "session busy");
        }
        let slice = Self::anchors_for(k, slice, record.kind);
        let Ok((ulcl, anchor)) = smf_select_target_path(k.topology(), &slice, target_ran) else {
            return fail(k, "no candidate");
        };
        let record = record.clone();
        let same_ulcl = ulcl == record.serving_ulcl;
        let same_anchor = anchor == record.serving_icn_ap;
        let ran_tunnel = k.alloc_tunnel();
        let ap_tunnel = if same_ulcl { record.tunnel_chain.ulcl_ap } else { k.alloc_tunnel() };
        let ue_addr = if record.kind == SessionKind::Ip && !same_anchor {
            self.alloc_addr(anchor)
        } else {
            record.ue_addr
        };
        let assoc = association(ue_addr, record.service_addr);
        let priority = 11 + record.generation as i32;

        let mut steps = Vec::new();
        if same_ulcl {
            // only the downlink leg changes: one more specific rule toward the target RAN
            let delta = N4Delta {
                add_tunnels: vec![(ran_tunnel, tunnel_info(target_ran, TunnelSide::Access, assoc, session))],
                add_rules: vec![rules(session, ue_addr, ap_tunnel, ran_tunnel, priority).remove(1)],
                ..Default::default()
            };
            let undo = N4Delta {
                remove_tunnels: vec![ran_tunnel],
                ..Default::default()
            };
            steps.push(Step::new(ulcl, Some(4), n4(delta)).undo(ulcl, n4(undo)));
        } else {
            let delta = N4Delta {
                add_tunnels: vec![
                    (ran_tunnel, tunnel_info(target_ran, TunnelSide::Access, assoc, session)),
                    (ap_tunnel, tunnel_info(anchor, TunnelSide::Core, assoc, session)),
                ],
                add_rules: rules(session, ue_addr, ap_tunnel, ran_tunnel, priority),
                ..Default::default()
            };
            let undo = N4Delta {
                remove_tunnels: vec![ran_tunnel, ap_tunnel],
                remove_rules_for: vec![session],
                ..Default::default()
            };
            steps.push(Step::new(ulcl, Some(4), n4(delta)).undo(ulcl, n4(undo)));
            let ap_info = tunnel_info(ulcl, TunnelSide::Access, assoc, session);
            match record.kind {
                SessionKind::Icn => {
                    let Some(icn_smf) = first_with_role(k, Role::IcnSmf) else {
                        return fail(k, "no icn session manager");
                    };
                    let op = IcnSmOp::Move {
                        session,
                        new_anchor: anchor,
                        old_anchor: record.serving_icn_ap,
                        tunnel: ap_tunnel,
                        tunnel_info: ap_info,
                        prefix: record.prefix.clone(),
                    };
                    steps.push(Step::new(icn_smf, Some(5), ControlBody::IcnSmRequest { op }));
                }
                SessionKind::Ip => {
                    let delta = N4Delta {
                        add_tunnels: vec![(ap_tunnel, ap_info)],
                        bind_sessions: vec![SessionBinding {
                            session,
                            dl_tunnel: ap_tunnel,
                            ue_addr,
                        }],
                        ..Default::default()
                    };
                    let undo = N4Delta {
                        remove_tunnels: vec![ap_tunnel],
                        ..Default::default()
                    };
                    steps.push(Step::new(anchor, Some(6), n4(delta)).undo(anchor, n4(undo)));
                }
            }
        }

        let path = PathInfo {
            session,
            ran_tunnel,
            ran_tunnel_info: tunnel_info(ulcl, TunnelSide::Access, assoc, session),
            ue_addr,
            anchor,
            addr_changed: ue_addr != record.ue_addr,
        };
        self.moves.insert(
            session,
            Move {
                target_ran,
                ulcl,
                anchor,
                ran_tunnel,
                ap_tunnel,
                ue_addr,
            },
        );
        if let Some(r) = self.records.get_mut(&session) {
            r.state = SessionState::HandoverPreparing;
        }
        let ctx = Ctx::Handover {
            req: req.clone(),
            session,
            path,
        };
        let progress = self.seq.start(k, me, ctx, steps);
        self.progress(k, me, progress, &req);
    }

    /// Step 12: tear down the source leg, then commit the record.
    fn complete_handover(&mut self, k: &mut Kernel, me: NodeId, req: ControlMessage) {
        let ControlBody::HandoverComplete { session, .. } = req.body else {
            unreachable!()
        };
        let (Some(record), Some(mv)) = (self.records.get(&session), self.moves.get(&session)) else {
            return reply(k, me, &req, ControlBody::HandoverCompleteAck);
        };
        let old = record.tunnel_chain;
        let same_ulcl = mv.ulcl == record.serving_ulcl;
        let same_anchor = mv.anchor == record.serving_icn_ap;
        let mut steps = Vec::new();
        let ulcl_delta = if same_ulcl {
            N4Delta {
                remove_tunnels: vec![old.ran_ulcl],
                ..Default::default()
            }
        } else {
            N4Delta {
                remove_tunnels: vec![old.ran_ulcl, old.ulcl_ap],
                remove_rules_for: vec![session],
                ..Default::default()
            }
        };
        steps.push(Step::new(record.serving_ulcl, Some(12), n4(ulcl_delta)));
        if !same_ulcl {
            match (record.kind, same_anchor) {
                (SessionKind::Icn, false) => {
                    if let Some(icn_smf) = first_with_role(k, Role::IcnSmf) {
                        let op = IcnSmOp::Release {
                            session,
                            new_anchor: mv.anchor,
                            old_anchor: record.serving_icn_ap,
                            prefix: record.prefix.clone(),
                        };
                        steps.push(Step::new(icn_smf, Some(12), ControlBody::IcnSmRequest { op }));
                    }
                }
                (SessionKind::Ip, false) => {
                    let delta = N4Delta {
                        remove_tunnels: vec![old.ulcl_ap],
                        unbind_sessions: vec![session],
                        ..Default::default()
                    };
                    steps.push(Step::new(record.serving_icn_ap, Some(12), n4(delta)));
                }
                (_, true) => {
                    let delta = N4Delta {
                        remove_tunnels: vec![old.ulcl_ap],
                        ..Default::default()
                    };
                    steps.push(Step::new(record.serving_icn_ap, Some(12), n4(delta)));
                }
            }
        }
        if let Some(r) = self.records.get_mut(&session) {
            r.state = SessionState::HandoverExecuting;
        }
        let ctx = Ctx::Complete {
            req: req.clone(),
            session,
        };
        let progress = self.seq.start(k, me, ctx, steps);
        self.progress(k, me, progress, &req);
    }

    fn progress(&mut self, k: &mut Kernel, me: NodeId, progress: Progress<Ctx>, msg: &ControlMessage) {
        match progress {
            Progress::Pending => {}
            Progress::Unknown => unexpected(k, me, msg.tag()),
            Progress::Finished(ctx) => self.finished(k, me, ctx),
            Progress::Failed(ctx, reason) => self.failed(k, me, ctx, reason),
        }
    }

    fn finished(&mut self, k: &mut Kernel, me: NodeId, ctx: Ctx) {
        match ctx {
            Ctx::Establish {
                req,
                mut record,
                slice,
                path,
            } => {
                record.state = SessionState::Active;
                if record.kind == SessionKind::Ip {
                    k.set_ip_route(record.ue_addr, record.serving_icn_ap);
                }
                let kind = record.kind;
                self.slices.insert(record.session_id, slice);
                self.records.insert(record.session_id, record);
                reply(k, me, &req, ControlBody::SessionEstablishAccept { path, kind });
            }
            Ctx::Handover { req, session, path } => {
                if let Some(r) = self.records.get_mut(&session) {
                    r.state = SessionState::HandoverExecuting;
                    if r.kind == SessionKind::Ip && path.addr_changed {
                        k.set_ip_route(path.ue_addr, path.anchor);
                    }
                }
                send_step(k, me, &req, 7, ControlBody::SmContextUpdateAck { result: Ok(path) });
            }
            Ctx::Complete { req, session } => {
                self.commit(k, session);
                reply(k, me, &req, ControlBody::HandoverCompleteAck);
            }
        }
    }

    fn failed(&mut self, k: &mut Kernel, me: NodeId, ctx: Ctx, reason: String) {
        k.inc_cause("provisioning_failures", me, &reason);
        match ctx {
            Ctx::Establish { req, record, .. } => {
                k.trace_line(me, &format!("session {} released: {reason}", record.session_id));
                let reason = format!("provisioning failed: {reason}");
                reply(k, me, &req, ControlBody::SessionEstablishReject { reason });
            }
            Ctx::Handover { req, session, .. } => {
                self.moves.remove(&session);
                if let Some(r) = self.records.get_mut(&session) {
                    r.state = SessionState::Active;
                }
                send_step(k, me, &req, 7, ControlBody::SmContextUpdateAck { result: Err(reason) });
            }
            Ctx::Complete { req, session } => {
                // the target path is live either way; keep going
                self.commit(k, session);
                reply(k, me, &req, ControlBody::HandoverCompleteAck);
            }
        }
    }

    fn commit(&mut self, k: &mut Kernel, session: SessionId) {
        let (Some(r), Some(mv)) = (self.records.get_mut(&session), self.moves.remove(&session)) else {
            return;
        };
        if r.kind == SessionKind::Ip && r.ue_addr != mv.ue_addr {
            k.remove_ip_route(r.ue_addr);
        }
        r.serving_ran = mv.target_ran;
        r.serving_ulcl = mv.ulcl;
        r.serving_icn_ap = mv.anchor;
        r.tunnel_chain = TunnelChain {
            ran_ulcl: mv.ran_tunnel,
            ulcl_ap: mv.ap_tunnel,
        };
        r.ue_addr = mv.ue_addr;
        r.generation += 1;
        r.state = SessionState::Active;
    }

    pub fn dump(&self) -> Vec<String> {
        self.records
            .values()
            .map(|r| {
                format!(
                    "session {} ue={} {:?} ran={} ulcl={} anchor={} tunnels={},{} addr={} gen={} {:?}",
                    r.session_id,
                    r.ue_id,
                    r.kind,
                    r.serving_ran,
                    r.serving_ulcl,
                    r.serving_icn_ap,
                    r.tunnel_chain.ran_ulcl,
                    r.tunnel_chain.ulcl_ap,
                    r.ue_addr,
                    r.generation,
                    r.state
                )
            })
            .collect()
    }
}

/// Response under the request's correlation id but a later step number.
fn send_step(k: &mut Kernel, me: NodeId, req: &ControlMessage, step: u8, body: ControlBody) {
    super::send_ctl(k, me, req.sender, req.corr, Some(step), body);
}

#[derive(Debug, Clone)]
enum IcnCtx {
    Reply { req: ControlMessage, step: Option<u8> },
    /// Resolution repointed; the old anchor is released after draining.
    Drain { req: ControlMessage, old_anchor: NodeId, session: SessionId, prefix: Option<Name> },
}

/// ICN session manager: anchor binding, mobility redirects and name
/// resolution updates.
#[derive(Debug, Clone)]
pub struct IcnSmfNode {
    drain_ms: u64,
    seq: Sequencer<IcnCtx>,
    draining: BTreeMap<u64, IcnCtx>,
}

impl IcnSmfNode {
    pub fn new(cfg: &NetworkConfig) -> Self {
        Self {
            drain_ms: cfg.guard_ms,
            seq: Sequencer::default(),
            draining: BTreeMap::new(),
        }
    }

    pub fn handle(&mut self, k: &mut Kernel, me: NodeId, payload: Payload) {
        match payload {
            Payload::Deliver {
                msg: Message::Control(c),
                ..
            } => match &c.body {
                ControlBody::IcnSmRequest { op } => self.request(k, me, op.clone(), &c),
                _ => {
                    let progress = self.seq.on_response(k, me, &c);
                    self.progress(k, me, progress, c.tag());
                }
            },
            Payload::Timer(Timer::LabelDrain { corr }) => {
                if let Some(IcnCtx::Drain {
                    req,
                    old_anchor,
                    session,
                    prefix,
                }) = self.draining.remove(&corr)
                {
                    let update = AnchorUpdate::Release { session, prefix };
                    let steps = vec![Step::new(old_anchor, Some(12), ControlBody::IcnSessionUpdate { update })];
                    let ctx = IcnCtx::Reply { req, step: Some(12) };
                    let progress = self.seq.start(k, me, ctx, steps);
                    self.progress(k, me, progress, "drain");
                }
            }
            other => unexpected(k, me, other.kind()),
        }
    }

    fn request(&mut self, k: &mut Kernel, me: NodeId, op: IcnSmOp, req: &ControlMessage) {
        let nrs = first_with_role(k, Role::Nrs);
        let (steps, ctx) = match op {
            IcnSmOp::Establish {
                session,
                anchor,
                tunnel,
                prefix,
            } => {
                let bind = AnchorUpdate::Bind {
                    session,
                    tunnel,
                    tunnel_info: None,
                    prefix: prefix.clone(),
                };
                let undo = AnchorUpdate::Release { session, prefix: None };
                let mut steps = vec![Step::new(anchor, None, ControlBody::IcnSessionUpdate { update: bind })
                    .undo(anchor, ControlBody::IcnSessionUpdate { update: undo })];
                if let (Some(prefix), Some(nrs)) = (prefix, nrs) {
                    steps.push(Step::new(nrs, None, ControlBody::NrsUpdate { prefix, anchor }));
                }
                (steps, IcnCtx::Reply { req: req.clone(), step: None })
            }
            // step 6 at both anchors; new one first so the redirect has somewhere to go
            IcnSmOp::Move {
                session,
                new_anchor,
                old_anchor,
                tunnel,
                tunnel_info,
                prefix,
            } => {
                let bind = AnchorUpdate::Bind {
                    session,
                    tunnel,
                    tunnel_info: Some(tunnel_info),
                    prefix: prefix.clone(),
                };
                let undo = AnchorUpdate::Release { session, prefix: None };
                let mut steps = vec![Step::new(new_anchor, Some(6), ControlBody::IcnSessionUpdate { update: bind })
                    .undo(new_anchor, ControlBody::IcnSessionUpdate { update: undo })];
                if let (true, Some(prefix)) = (new_anchor != old_anchor, prefix) {
                    let redirect = AnchorUpdate::Redirect {
                        session,
                        prefix,
                        target_anchor: new_anchor,
                    };
                    steps.push(Step::new(old_anchor, Some(6), ControlBody::IcnSessionUpdate { update: redirect }));
                }
                (steps, IcnCtx::Reply { req: req.clone(), step: Some(7) })
            }
            // step 12: resolution first, so no router keeps steering at the old anchor
            IcnSmOp::Release {
                session,
                new_anchor,
                old_anchor,
                prefix,
            } => {
                let mut steps = Vec::new();
                if let (Some(prefix), Some(nrs)) = (prefix.clone(), nrs) {
                    steps.push(Step::new(
                        nrs,
                        Some(12),
                        ControlBody::NrsUpdate {
                            prefix,
                            anchor: new_anchor,
                        },
                    ));
                }
                let ctx = IcnCtx::Drain {
                    req: req.clone(),
                    old_anchor,
                    session,
                    prefix,
                };
                (steps, ctx)
            }
            IcnSmOp::Unbind { session, anchor } => {
                let update = AnchorUpdate::Release { session, prefix: None };
                let steps = vec![Step::new(anchor, req.step, ControlBody::IcnSessionUpdate { update })];
                (steps, IcnCtx::Reply { req: req.clone(), step: req.step })
            }
        };
        let progress = self.seq.start(k, me, ctx, steps);
        self.progress(k, me, progress, req.tag());
    }

    fn progress(&mut self, k: &mut Kernel, me: NodeId, progress: Progress<IcnCtx>, tag: &str) {
        match progress {
            Progress::Pending => {}
            Progress::Unknown => unexpected(k, me, tag),
            Progress::Finished(IcnCtx::Reply { req, step }) => {
                super::send_ctl(k, me, req.sender, req.corr, step, ControlBody::IcnSmResponse { error: None });
            }
            Progress::Finished(drain @ IcnCtx::Drain { .. }) => {
                let IcnCtx::Drain { req, .. } = &drain else { unreachable!() };
                let corr = req.corr;
                self.draining.insert(corr, drain);
                k.set_timer(me, self.drain_ms, Timer::LabelDrain { corr });
            }
            Progress::Failed(ctx, reason) => {
                let (req, step) = match ctx {
                    IcnCtx::Reply { req, step } => (req, step),
                    IcnCtx::Drain { req, .. } => (req, Some(12)),
                };
                let error = Some(format!("anchor nack: {reason}"));
                super::send_ctl(k, me, req.sender, req.corr, step, ControlBody::IcnSmResponse { error });
            }
        }
    }
}
