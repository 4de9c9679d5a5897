use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::name::Name;
use crate::packet::{Addr, NodeId, SessionId, TunnelId};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SliceId(pub String);

impl fmt::Display for SliceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SliceId {
    fn from(s: &str) -> Self {
        SliceId(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceDescriptor {
    pub slice_id: SliceId,
    pub icn_ap_candidates: Vec<NodeId>,
    pub ulcl_candidates: Vec<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionKind {
    Icn,
    Ip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionState {
    Establishing,
    Active,
    HandoverPreparing,
    HandoverExecuting,
    Released,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TunnelChain {
    pub ran_ulcl: TunnelId,
    pub ulcl_ap: TunnelId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PduSessionRecord {
    pub session_id: SessionId,
    pub ue_id: NodeId,
    pub kind: SessionKind,
    pub slice_id: SliceId,
    pub serving_ran: NodeId,
    pub serving_ulcl: NodeId,
    pub serving_icn_ap: NodeId,
    pub tunnel_chain: TunnelChain,
    pub ue_addr: Addr,
    pub service_addr: Addr,
    pub prefix: Option<Name>,
    pub state: SessionState,
    /// Bumped on every completed handover; orders classifier priorities.
    pub generation: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UeContext {
    pub ue_id: NodeId,
    pub icn_authorized: bool,
    pub serving_ran: NodeId,
    pub sessions: BTreeSet<SessionId>,
    pub ue_name_prefix: Option<Name>,
    pub allowed_slices: BTreeSet<SliceId>,
}
