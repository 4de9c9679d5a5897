//! User-plane functions: RAN tunnel endpoint, uplink classifier and anchor
//! point.

mod anchor;
mod classifier;
mod ran;

use thiserror::Error;

pub use anchor::{AnchorUpdate, IcnApState};
pub use classifier::{ClassifierRule, FiveTupleMatch, N4Delta, RuleSpec, SessionBinding, UlClState};
pub use ran::{RanEmission, RanState, PENDING_DL_LIMIT};

use crate::forwarder::ForwarderError;
use crate::packet::{NodeId, SessionId, TunnelId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UserPlaneError {
    #[error("no classifier rule matches")]
    NoMatch,
    #[error("rule or binding references unknown tunnel {0}")]
    DanglingTunnel(TunnelId),
    #[error("unknown tunnel {0}")]
    UnknownTunnel(TunnelId),
    #[error("UE {0} is not attached")]
    NotAttached(NodeId),
    #[error("no tunnel for UE {ue} session {session}")]
    NoSessionTunnel { ue: NodeId, session: SessionId },
    #[error("expected an ICN PDU")]
    NotIcn,
    #[error(transparent)]
    Forwarder(#[from] ForwarderError),
}
