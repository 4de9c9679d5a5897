//! Control-plane vocabulary and pure decision functions. The network
//! functions that exchange these messages live in `nodes`.

mod message;
mod path;
mod policy;
mod session;

use thiserror::Error;

pub use message::{ControlBody, ControlMessage, IcnSmOp, MsgKind, PathInfo};
pub use path::{nearest, smf_select_target_path};
pub use policy::{
    amf_register_ue, Nrs, Nssf, PolicyDelta, PolicyStore, ProfilePatch, RegistrationOutcome, SubscriptionProfile,
};
pub use session::{PduSessionRecord, SessionKind, SessionState, SliceDescriptor, SliceId, TunnelChain, UeContext};

use crate::name::Name;
use crate::packet::NodeId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ControlError {
    #[error("UE is not subscribed")]
    NotSubscribed,
    #[error("UE is not authorized for ICN service")]
    NotAuthorized,
    #[error("no allowed slice matches")]
    NoSlice,
    #[error("no reachable candidate")]
    NoCandidate,
    #[error("prefix {0} is not resolvable")]
    Unresolved(Name),
    #[error("provisioning failed: {0}")]
    ProvisioningFailed(String),
    #[error("anchor {0} refused the update")]
    NackFromAnchor(NodeId),
    #[error("handover aborted: {0}")]
    HandoverAbort(String),
}
