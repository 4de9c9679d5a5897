//! Small control functions: slice selection, subscription data, ICN
//! application function and name resolution.

use std::collections::{BTreeMap, BTreeSet};

use crate::control::{ControlBody, ControlMessage, Nrs, Nssf, PolicyStore};
use crate::engine::{Action, Kernel, Message, Payload, Role};
use crate::packet::NodeId;

use super::{first_with_role, reply, request, unexpected, NetworkConfig};

fn control(k: &mut Kernel, me: NodeId, payload: Payload) -> Option<ControlMessage> {
    match payload {
        Payload::Deliver {
            msg: Message::Control(c),
            ..
        } => Some(c),
        other => {
            unexpected(k, me, other.kind());
            None
        }
    }
}

#[derive(Debug, Clone)]
pub struct NssfNode {
    pub nssf: Nssf,
}

impl NssfNode {
    pub fn new(cfg: &NetworkConfig) -> Self {
        let mut nssf = Nssf::default();
        for s in &cfg.slices {
            nssf.add_slice(s.clone());
        }
        Self { nssf }
    }

    pub fn handle(&mut self, k: &mut Kernel, me: NodeId, payload: Payload) {
        let Some(c) = control(k, me, payload) else { return };
        match &c.body {
            ControlBody::SliceSelectRequest { hint, allowed, .. } => {
                let allowed: BTreeSet<_> = allowed.iter().cloned().collect();
                let slice = self.nssf.nssf_select_slice(&allowed, hint.as_ref()).ok();
                reply(k, me, &c, ControlBody::SliceSelectResponse { slice });
            }
            _ => unexpected(k, me, c.tag()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PcfUdmNode {
    pub store: PolicyStore,
}

impl PcfUdmNode {
    pub fn new(cfg: &NetworkConfig) -> Self {
        let mut store = PolicyStore::default();
        for p in &cfg.profiles {
            store.insert(p.clone());
        }
        Self { store }
    }

    pub fn handle(&mut self, k: &mut Kernel, me: NodeId, payload: Payload) {
        let Some(c) = control(k, me, payload) else { return };
        match &c.body {
            ControlBody::SubscriptionQuery { ue } => {
                let profile = self.store.profile(*ue).cloned();
                reply(k, me, &c, ControlBody::SubscriptionResponse { profile });
            }
            ControlBody::PolicyPush { delta } => {
                self.store.icnaf_push_policy(delta);
                reply(k, me, &c, ControlBody::PolicyAck);
            }
            _ => unexpected(k, me, c.tag()),
        }
    }
}

/// Pushes operator policy toward PCF/UDM.
#[derive(Debug, Clone, Copy)]
pub struct IcnAfNode;

impl IcnAfNode {
    pub fn handle(&mut self, k: &mut Kernel, me: NodeId, payload: Payload) {
        match payload {
            Payload::Action(Action::PushPolicy { delta }) => match first_with_role(k, Role::PcfUdm) {
                Some(udm) => {
                    request(k, me, udm, None, ControlBody::PolicyPush { delta });
                }
                None => unexpected(k, me, "policy push without udm"),
            },
            Payload::Deliver {
                msg: Message::Control(c),
                ..
            } if matches!(c.body, ControlBody::PolicyAck) => {}
            other => unexpected(k, me, other.kind()),
        }
    }
}

/// Name resolution; every update is propagated to the data-network routers
/// before it is acknowledged.
#[derive(Debug, Clone, Default)]
pub struct NrsNode {
    pub nrs: Nrs,
    /// route corr -> update corr
    routes: BTreeMap<u64, u64>,
    /// update corr -> (update, acks outstanding)
    updates: BTreeMap<u64, (ControlMessage, usize)>,
}

impl NrsNode {
    pub fn handle(&mut self, k: &mut Kernel, me: NodeId, payload: Payload) {
        let Some(c) = control(k, me, payload) else { return };
        match &c.body {
            ControlBody::NrsUpdate { prefix, anchor } => {
                self.nrs.update(prefix.clone(), *anchor);
                let mut outstanding = 0;
                for router in k.topology().with_role(Role::IcnDnRouter) {
                    let Some(next_hop) = k.topology().next_hop(router, *anchor) else {
                        continue;
                    };
                    let body = ControlBody::RouteUpdate {
                        prefix: prefix.clone(),
                        next_hop,
                    };
                    if let Some(corr) = request(k, me, router, c.step, body) {
                        self.routes.insert(corr, c.corr);
                        outstanding += 1;
                    }
                }
                if outstanding == 0 {
                    reply(k, me, &c, ControlBody::NrsAck);
                } else {
                    self.updates.insert(c.corr, (c, outstanding));
                }
            }
            ControlBody::RouteAck => {
                let Some(update) = self.routes.remove(&c.corr) else {
                    return unexpected(k, me, c.tag());
                };
                if let Some((_, left)) = self.updates.get_mut(&update) {
                    *left -= 1;
                    if *left == 0 {
                        let (req, _) = self.updates.remove(&update).expect("present");
                        reply(k, me, &req, ControlBody::NrsAck);
                    }
                }
            }
            _ => unexpected(k, me, c.tag()),
        }
    }

    pub fn dump(&self) -> Vec<String> {
        self.nrs
            .entries()
            .map(|(prefix, anchor)| format!("resolve {prefix} -> {anchor}"))
            .collect()
    }
}
