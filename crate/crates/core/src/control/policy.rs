//! Subscription, policy, slice selection and name resolution tables.

use std::collections::{BTreeMap, BTreeSet};

use crate::name::Name;
use crate::packet::NodeId;

use super::session::{SliceDescriptor, SliceId, UeContext};
use super::ControlError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubscriptionProfile {
    pub ue_id: NodeId,
    pub icn_service_enabled: bool,
    pub allowed_slices: BTreeSet<SliceId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfilePatch {
    pub ue_id: NodeId,
    pub icn_service_enabled: Option<bool>,
    pub add_slices: Vec<SliceId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PolicyDelta {
    pub patches: Vec<ProfilePatch>,
}

/// UDM/PCF subscription data, fed by the ICN application function.
#[derive(Debug, Clone, Default)]
pub struct PolicyStore {
    profiles: BTreeMap<NodeId, SubscriptionProfile>,
}

impl PolicyStore {
    pub fn insert(&mut self, profile: SubscriptionProfile) {
        self.profiles.insert(profile.ue_id, profile);
    }

    pub fn profile(&self, ue: NodeId) -> Option<&SubscriptionProfile> {
        self.profiles.get(&ue)
    }

    /// Applies profile deltas; a patch for an unknown UE creates a profile.
    pub fn icnaf_push_policy(&mut self, delta: &PolicyDelta) {
        for patch in &delta.patches {
            let profile = self
                .profiles
                .entry(patch.ue_id)
                .or_insert_with(|| SubscriptionProfile {
                    ue_id: patch.ue_id,
                    icn_service_enabled: false,
                    allowed_slices: BTreeSet::new(),
                });
            if let Some(enabled) = patch.icn_service_enabled {
                profile.icn_service_enabled = enabled;
            }
            profile.allowed_slices.extend(patch.add_slices.iter().cloned());
        }
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegistrationOutcome {
    Authorized,
    IcnNotEnabled,
    NotSubscribed,
}

/// Builds the AMF context for a UE from its subscription profile.
pub fn amf_register_ue(
    ue_id: NodeId,
    serving_ran: NodeId,
    prefix: Option<Name>,
    profile: Option<&SubscriptionProfile>,
) -> (UeContext, RegistrationOutcome) {
    let outcome = match profile {
        None => RegistrationOutcome::NotSubscribed,
        Some(p) if p.icn_service_enabled => RegistrationOutcome::Authorized,
        Some(_) => RegistrationOutcome::IcnNotEnabled,
    };
    let ctx = UeContext {
        ue_id,
        icn_authorized: outcome == RegistrationOutcome::Authorized,
        serving_ran,
        sessions: BTreeSet::new(),
        ue_name_prefix: prefix,
        allowed_slices: profile.map(|p| p.allowed_slices.clone()).unwrap_or_default(),
    };
    (ctx, outcome)
}

#[derive(Debug, Clone, Default)]
pub struct Nssf {
    slices: BTreeMap<SliceId, SliceDescriptor>,
}

impl Nssf {
    pub fn add_slice(&mut self, slice: SliceDescriptor) {
        self.slices.insert(slice.slice_id.clone(), slice);
    }

    pub fn slice(&self, id: &SliceId) -> Option<&SliceDescriptor> {
        self.slices.get(id)
    }

    /// The unique allowed slice matching `hint`. Without a hint, a UE with
    /// exactly one allowed slice gets that slice.
    pub fn nssf_select_slice(
        &self,
        allowed: &BTreeSet<SliceId>,
        hint: Option<&SliceId>,
    ) -> Result<SliceDescriptor, ControlError> {
        let chosen = match hint {
            Some(h) if allowed.contains(h) => h,
            Some(_) => return Err(ControlError::NoSlice),
            None if allowed.len() == 1 => allowed.iter().next().unwrap(),
            None => return Err(ControlError::NoSlice),
        };
        self.slices.get(chosen).cloned().ok_or(ControlError::NoSlice)
    }
}

/// Maps producer prefixes to their current anchor.
#[derive(Debug, Clone, Default)]
pub struct Nrs {
    map: BTreeMap<Name, NodeId>,
}

impl Nrs {
    pub fn update(&mut self, prefix: Name, anchor: NodeId) {
        self.map.insert(prefix, anchor);
    }

    pub fn remove(&mut self, prefix: &Name) {
        self.map.remove(prefix);
    }

    pub fn nrs_resolve(&self, prefix: &Name) -> Result<NodeId, ControlError> {
        self.map
            .get(prefix)
            .copied()
            .ok_or_else(|| ControlError::Unresolved(prefix.clone()))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Name, NodeId)> {
        self.map.iter().map(|(k, v)| (k, *v))
    }
}
