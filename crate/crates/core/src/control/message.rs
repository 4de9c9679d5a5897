use std::fmt;

use crate::name::Name;
use crate::packet::{Addr, NodeId, SessionId, TunnelId, TunnelInfo};
use crate::user_plane::{AnchorUpdate, N4Delta};

use super::policy::{PolicyDelta, SubscriptionProfile};
use super::session::{SessionKind, SliceDescriptor, SliceId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MsgKind {
    Request,
    Response,
    Indication,
}

impl fmt::Display for MsgKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MsgKind::Request => "req",
            MsgKind::Response => "rsp",
            MsgKind::Indication => "ind",
        })
    }
}

/// What the ICN session manager is asked to do for a session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IcnSmOp {
    /// Initial anchoring: bind the session at `anchor` and publish the prefix.
    Establish {
        session: SessionId,
        anchor: NodeId,
        tunnel: TunnelId,
        prefix: Option<Name>,
    },
    /// Handover: bind at `new_anchor`, redirect at `old_anchor`.
    Move {
        session: SessionId,
        new_anchor: NodeId,
        old_anchor: NodeId,
        tunnel: TunnelId,
        tunnel_info: TunnelInfo,
        prefix: Option<Name>,
    },
    /// After handover: repoint resolution, then drop old-anchor state.
    Release {
        session: SessionId,
        new_anchor: NodeId,
        old_anchor: NodeId,
        prefix: Option<Name>,
    },
    /// Abort path: undo a bind at `anchor`.
    Unbind {
        session: SessionId,
        anchor: NodeId,
    },
}

/// Tunnel and address data handed back to the AMF for the target RAN.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathInfo {
    pub session: SessionId,
    pub ran_tunnel: TunnelId,
    pub ran_tunnel_info: TunnelInfo,
    pub ue_addr: Addr,
    pub anchor: NodeId,
    pub addr_changed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ControlBody {
    RrcSetup,
    RrcSetupComplete,
    RrcRelease,
    RegistrationRequest {
        ran: NodeId,
        prefix: Option<Name>,
    },
    RegistrationAccept {
        icn_authorized: bool,
    },
    SubscriptionQuery {
        ue: NodeId,
    },
    SubscriptionResponse {
        profile: Option<SubscriptionProfile>,
    },
    SessionEstablishRequest {
        ue: NodeId,
        kind: SessionKind,
        slice_hint: Option<SliceId>,
        slice: Option<SliceDescriptor>,
        ran: NodeId,
        prefix: Option<Name>,
    },
    SessionEstablishAccept {
        path: PathInfo,
        kind: SessionKind,
    },
    SessionEstablishReject {
        reason: String,
    },
    SliceSelectRequest {
        ue: NodeId,
        hint: Option<SliceId>,
        allowed: Vec<SliceId>,
    },
    SliceSelectResponse {
        slice: Option<SliceDescriptor>,
    },
    N4Update {
        delta: N4Delta,
    },
    N4Ack,
    N4Nack {
        reason: String,
    },
    SessionResourceSetup {
        ue: NodeId,
        session: SessionId,
        tunnel: TunnelId,
        info: TunnelInfo,
    },
    SessionResourceSetupAck,
    IcnSmRequest {
        op: IcnSmOp,
    },
    IcnSmResponse {
        error: Option<String>,
    },
    IcnSessionUpdate {
        update: AnchorUpdate,
    },
    IcnSessionAck,
    IcnSessionNack {
        reason: String,
    },
    NrsUpdate {
        prefix: Name,
        anchor: NodeId,
    },
    NrsAck,
    RouteUpdate {
        prefix: Name,
        next_hop: NodeId,
    },
    RouteAck,
    PolicyPush {
        delta: PolicyDelta,
    },
    PolicyAck,
    HandoverRequest {
        target_ran: NodeId,
        sessions: Vec<SessionId>,
        names: Vec<Name>,
    },
    HandoverRequired {
        ue: NodeId,
        target_ran: NodeId,
        sessions: Vec<SessionId>,
        names: Vec<Name>,
    },
    SmContextUpdate {
        ue: NodeId,
        session: SessionId,
        target_ran: NodeId,
    },
    SmContextUpdateAck {
        result: Result<PathInfo, String>,
    },
    PathSwitchCommand {
        ue: NodeId,
        session: SessionId,
        tunnel: TunnelId,
        info: TunnelInfo,
    },
    PathSwitchAck,
    TunnelSetup {
        tunnel: TunnelId,
    },
    TunnelSetupAck,
    HandoverAck {
        target_ran: NodeId,
        path: PathInfo,
    },
    HandoverReject {
        reason: String,
    },
    HandoverConfirm,
    HandoverNotify {
        ue: NodeId,
    },
    ReleaseCommand {
        ue: NodeId,
        session: SessionId,
    },
    ReleaseComplete,
    TunnelRelease {
        tunnel: TunnelId,
    },
    TunnelReleaseAck,
    HandoverComplete {
        ue: NodeId,
        session: SessionId,
    },
    HandoverCompleteAck,
}

impl ControlBody {
    pub fn tag(&self) -> &'static str {
        use ControlBody::*;
        match self {
            RrcSetup => "RrcSetup",
            RrcSetupComplete => "RrcSetupComplete",
            RrcRelease => "RrcRelease",
            RegistrationRequest { .. } => "RegistrationRequest",
            RegistrationAccept { .. } => "RegistrationAccept",
            SubscriptionQuery { .. } => "SubscriptionQuery",
            SubscriptionResponse { .. } => "SubscriptionResponse",
            SessionEstablishRequest { .. } => "SessionEstablishRequest",
            SessionEstablishAccept { .. } => "SessionEstablishAccept",
            SessionEstablishReject { .. } => "SessionEstablishReject",
            SliceSelectRequest { .. } => "SliceSelectRequest",
            SliceSelectResponse { .. } => "SliceSelectResponse",
            N4Update { .. } => "N4Update",
            N4Ack => "N4Ack",
            N4Nack { .. } => "N4Nack",
            SessionResourceSetup { .. } => "SessionResourceSetup",
            SessionResourceSetupAck => "SessionResourceSetupAck",
            IcnSmRequest { .. } => "IcnSmRequest",
            IcnSmResponse { .. } => "IcnSmResponse",
            IcnSessionUpdate { .. } => "IcnSessionUpdate",
            IcnSessionAck => "IcnSessionAck",
            IcnSessionNack { .. } => "IcnSessionNack",
            NrsUpdate { .. } => "NrsUpdate",
            NrsAck => "NrsAck",
            RouteUpdate { .. } => "RouteUpdate",
            RouteAck => "RouteAck",
            PolicyPush { .. } => "PolicyPush",
            PolicyAck => "PolicyAck",
            HandoverRequest { .. } => "HandoverRequest",
            HandoverRequired { .. } => "HandoverRequired",
            SmContextUpdate { .. } => "SmContextUpdate",
            SmContextUpdateAck { .. } => "SmContextUpdateAck",
            PathSwitchCommand { .. } => "PathSwitchCommand",
            PathSwitchAck => "PathSwitchAck",
            TunnelSetup { .. } => "TunnelSetup",
            TunnelSetupAck => "TunnelSetupAck",
            HandoverAck { .. } => "HandoverAck",
            HandoverReject { .. } => "HandoverReject",
            HandoverConfirm => "HandoverConfirm",
            HandoverNotify { .. } => "HandoverNotify",
            ReleaseCommand { .. } => "ReleaseCommand",
            ReleaseComplete => "ReleaseComplete",
            TunnelRelease { .. } => "TunnelRelease",
            TunnelReleaseAck => "TunnelReleaseAck",
            HandoverComplete { .. } => "HandoverComplete",
            HandoverCompleteAck => "HandoverCompleteAck",
        }
    }

    pub fn kind(&self) -> MsgKind {
        use ControlBody::*;
        match self {
            RrcSetup
            | RegistrationRequest { .. }
            | SubscriptionQuery { .. }
            | SessionEstablishRequest { .. }
            | SliceSelectRequest { .. }
            | N4Update { .. }
            | SessionResourceSetup { .. }
            | IcnSmRequest { .. }
            | IcnSessionUpdate { .. }
            | NrsUpdate { .. }
            | RouteUpdate { .. }
            | PolicyPush { .. }
            | HandoverRequest { .. }
            | SmContextUpdate { .. }
            | PathSwitchCommand { .. }
            | TunnelSetup { .. }
            | ReleaseCommand { .. }
            | TunnelRelease { .. }
            | HandoverComplete { .. } => MsgKind::Request,
            HandoverRequired { .. } | HandoverConfirm | HandoverNotify { .. } | RrcRelease => MsgKind::Indication,
            _ => MsgKind::Response,
        }
    }

    /// Negative responses.
    pub fn is_failure(&self) -> bool {
        use ControlBody::*;
        match self {
            SessionEstablishReject { .. }
            | N4Nack { .. }
            | IcnSessionNack { .. }
            | HandoverReject { .. } => true,
            SliceSelectResponse { slice } => slice.is_none(),
            IcnSmResponse { error } => error.is_some(),
            SmContextUpdateAck { result } => result.is_err(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlMessage {
    pub corr: u64,
    /// Handover step (1..=12) this message belongs to, if any.
    pub step: Option<u8>,
    pub sender: NodeId,
    pub receiver: NodeId,
    pub body: ControlBody,
}

impl ControlMessage {
    pub fn tag(&self) -> &'static str {
        self.body.tag()
    }

    pub fn kind(&self) -> MsgKind {
        self.body.kind()
    }
}
