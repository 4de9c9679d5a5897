use std::collections::{BTreeMap, BTreeSet};

use crate::packet::{
    decapsulate, Direction, Inner, NodeId, SessionId, TunnelId, TunnelInfo, TunnelTable, TunneledPacket,
};

use super::UserPlaneError;

/// Downlink packets held for a UE that has not arrived yet.
pub const PENDING_DL_LIMIT: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RanEmission {
    /// Uplink: onto the session tunnel toward the UL-CL.
    Tunnel(TunneledPacket),
    /// Downlink: over the radio link to the UE.
    Radio { ue: NodeId, session: SessionId, inner: Inner },
    /// Downlink for a tunnel or UE not yet ready; held until handover completes.
    Buffered,
}

#[derive(Debug, Clone, Default)]
pub struct RanState {
    attached: BTreeSet<NodeId>,
    ue_tunnels: BTreeMap<(NodeId, SessionId), TunnelId>,
    tunnels: TunnelTable,
    pending_dl: Vec<TunneledPacket>,
    overflow_drops: u64,
}

impl RanState {
    pub fn attach(&mut self, ue: NodeId) {
        self.attached.insert(ue);
    }

    pub fn detach(&mut self, ue: NodeId) {
        self.attached.remove(&ue);
    }

    pub fn is_attached(&self, ue: NodeId) -> bool {
        self.attached.contains(&ue)
    }

    pub fn attached(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.attached.iter().copied()
    }

    /// Installs the session tunnel, replacing any previous one for the same
    /// (UE, session).
    pub fn install_session(&mut self, ue: NodeId, session: SessionId, tunnel: TunnelId, info: TunnelInfo) {
        if let Some(old) = self.ue_tunnels.insert((ue, session), tunnel) {
            if old != tunnel {
                self.tunnels.remove(old);
            }
        }
        self.tunnels.insert(tunnel, info);
    }

    pub fn remove_session(&mut self, ue: NodeId, session: SessionId) -> Option<TunnelId> {
        let tunnel = self.ue_tunnels.remove(&(ue, session))?;
        self.tunnels.remove(tunnel);
        Some(tunnel)
    }

    pub fn session_tunnel(&self, ue: NodeId, session: SessionId) -> Option<TunnelId> {
        self.ue_tunnels.get(&(ue, session)).copied()
    }

    pub fn sessions(&self) -> impl Iterator<Item = ((NodeId, SessionId), TunnelId)> + '_ {
        self.ue_tunnels.iter().map(|(k, v)| (*k, *v))
    }

    pub fn tunnels(&self) -> &TunnelTable {
        &self.tunnels
    }

    pub fn pending(&self) -> usize {
        self.pending_dl.len()
    }

    pub fn overflow_drops(&self) -> u64 {
        self.overflow_drops
    }

    pub fn relay_uplink(&self, inner: Inner, ue: NodeId, session: SessionId) -> Result<RanEmission, UserPlaneError> {
        if !self.attached.contains(&ue) {
            return Err(UserPlaneError::NotAttached(ue));
        }
        let tunnel = self
            .session_tunnel(ue, session)
            .ok_or(UserPlaneError::NoSessionTunnel { ue, session })?;
        self.tunnels
            .encapsulate(inner, tunnel, Direction::Uplink)
            .map(RanEmission::Tunnel)
            .map_err(|_| UserPlaneError::UnknownTunnel(tunnel))
    }

    fn owner(&self, tunnel: TunnelId) -> Option<(NodeId, SessionId)> {
        self.ue_tunnels
            .iter()
            .find(|(_, t)| **t == tunnel)
            .map(|(k, _)| *k)
    }

    pub fn relay_downlink(&mut self, tp: TunneledPacket) -> RanEmission {
        match self.owner(tp.tunnel_id) {
            Some((ue, session)) if self.attached.contains(&ue) => {
                let (_, inner) = decapsulate(tp);
                RanEmission::Radio { ue, session, inner }
            }
            _ => {
                if self.pending_dl.len() >= PENDING_DL_LIMIT {
                    self.pending_dl.remove(0);
                    self.overflow_drops += 1;
                }
                self.pending_dl.push(tp);
                RanEmission::Buffered
            }
        }
    }

    /// Spec-shaped entry point covering both directions.
    pub fn ran_relay(
        &mut self,
        inner: Inner,
        ue: NodeId,
        session: SessionId,
        direction: Direction,
    ) -> Result<RanEmission, UserPlaneError> {
        match direction {
            Direction::Uplink => self.relay_uplink(inner, ue, session),
            Direction::Downlink => {
                if !self.attached.contains(&ue) {
                    return Err(UserPlaneError::NotAttached(ue));
                }
                if self.session_tunnel(ue, session).is_none() {
                    return Err(UserPlaneError::NoSessionTunnel { ue, session });
                }
                Ok(RanEmission::Radio { ue, session, inner })
            }
        }
    }

    /// Releases buffered packets whose UE is now attached with a matching
    /// session tunnel, in arrival order.
    pub fn flush(&mut self) -> Vec<RanEmission> {
        let pending = std::mem::take(&mut self.pending_dl);
        let mut out = Vec::new();
        for tp in pending {
            match self.owner(tp.tunnel_id) {
                Some((ue, session)) if self.attached.contains(&ue) => {
                    let (_, inner) = decapsulate(tp);
                    out.push(RanEmission::Radio { ue, session, inner });
                }
                _ => self.pending_dl.push(tp),
            }
        }
        out
    }

    /// Drops buffered packets for `tunnel`, returning how many.
    pub fn discard_pending(&mut self, tunnel: TunnelId) -> usize {
        let before = self.pending_dl.len();
        self.pending_dl.retain(|tp| tp.tunnel_id != tunnel);
        before - self.pending_dl.len()
    }
}
