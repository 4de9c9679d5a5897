use std::collections::BTreeMap;

use crate::engine::SimTime;
use crate::forwarder::{FaceKind, Forwarder, ForwarderActions, ForwarderRole, ForwardingLabel};
use crate::name::Name;
use crate::packet::{
    decapsulate, Addr, Direction, IcnPdu, Inner, IpPacket, NodeId, SessionId, TunnelId, TunnelInfo,
    TunnelTable, TunneledPacket,
};

use super::{N4Delta, UserPlaneError};

/// ICN session state pushed to an anchor by the ICN session manager.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnchorUpdate {
    /// Make this anchor the point of attachment for `session`: DL tunnel plus
    /// producer-prefix route through it.
    Bind {
        session: SessionId,
        tunnel: TunnelId,
        tunnel_info: Option<TunnelInfo>,
        prefix: Option<Name>,
    },
    /// Previous anchor during mobility: redirect `prefix` to `target_anchor`
    /// and demote the session tunnel to draining (uplink only).
    Redirect {
        session: SessionId,
        prefix: Name,
        target_anchor: NodeId,
    },
    /// Drop every trace of `session` here, including any label for `prefix`.
    Release {
        session: SessionId,
        prefix: Option<Name>,
    },
}

impl AnchorUpdate {
    pub fn session(&self) -> SessionId {
        match self {
            AnchorUpdate::Bind { session, .. }
            | AnchorUpdate::Redirect { session, .. }
            | AnchorUpdate::Release { session, .. } => *session,
        }
    }
}

/// Anchor point state: embedded forwarder plus tunnel relay. The same state
/// serves as an IP session anchor, in which case the forwarder stays idle.
#[derive(Debug, Clone)]
pub struct IcnApState {
    pub forwarder: Forwarder,
    tunnels: TunnelTable,
    dl_tunnels: BTreeMap<SessionId, TunnelId>,
    draining: BTreeMap<SessionId, TunnelId>,
    ip_sessions: BTreeMap<Addr, SessionId>,
    prefixes: BTreeMap<SessionId, Name>,
    anchor_role: bool,
}

impl IcnApState {
    pub fn new(cs_capacity: usize) -> Self {
        Self {
            forwarder: Forwarder::new(ForwarderRole::Anchor, cs_capacity),
            tunnels: TunnelTable::default(),
            dl_tunnels: BTreeMap::new(),
            draining: BTreeMap::new(),
            ip_sessions: BTreeMap::new(),
            prefixes: BTreeMap::new(),
            anchor_role: false,
        }
    }

    pub fn tunnels(&self) -> &TunnelTable {
        &self.tunnels
    }

    pub fn dl_tunnel(&self, session: SessionId) -> Option<TunnelId> {
        self.dl_tunnels.get(&session).copied()
    }

    pub fn draining_tunnel(&self, session: SessionId) -> Option<TunnelId> {
        self.draining.get(&session).copied()
    }

    pub fn dl_sessions(&self) -> impl Iterator<Item = (SessionId, TunnelId)> + '_ {
        self.dl_tunnels.iter().map(|(s, t)| (*s, *t))
    }

    /// Point-of-attachment flag: set while some ICN session is bound here.
    pub fn anchor_role(&self) -> bool {
        self.anchor_role
    }

    pub fn session_for_addr(&self, addr: Addr) -> Option<SessionId> {
        self.ip_sessions.get(&addr).copied()
    }

    pub fn n4_update(&mut self, delta: &N4Delta) -> Result<(), UserPlaneError> {
        let mut tunnels = self.tunnels.clone();
        for id in &delta.remove_tunnels {
            tunnels.remove(*id);
        }
        for (id, info) in &delta.add_tunnels {
            tunnels.insert(*id, info.clone());
        }
        if let Some(b) = delta.bind_sessions.iter().find(|b| !tunnels.contains(b.dl_tunnel)) {
            return Err(UserPlaneError::DanglingTunnel(b.dl_tunnel));
        }

        for id in &delta.remove_tunnels {
            self.drop_tunnel(*id);
        }
        for (id, info) in &delta.add_tunnels {
            self.tunnels.insert(*id, info.clone());
            self.forwarder.add_face(FaceKind::Tunnel(*id));
        }
        for session in &delta.unbind_sessions {
            self.unbind(*session);
        }
        for b in &delta.bind_sessions {
            self.dl_tunnels.insert(b.session, b.dl_tunnel);
            self.ip_sessions.insert(b.ue_addr, b.session);
        }
        Ok(())
    }

    fn unbind(&mut self, session: SessionId) {
        self.dl_tunnels.remove(&session);
        self.ip_sessions.retain(|_, s| *s != session);
        self.refresh_role();
    }

    fn drop_tunnel(&mut self, id: TunnelId) {
        self.tunnels.remove(id);
        if let Some(face) = self.forwarder.face_for(FaceKind::Tunnel(id)) {
            self.forwarder.remove_face(face);
        }
        let sessions: Vec<SessionId> = self
            .dl_tunnels
            .iter()
            .filter(|(_, t)| **t == id)
            .map(|(s, _)| *s)
            .collect();
        for s in sessions {
            self.unbind(s);
        }
        self.draining.retain(|_, t| *t != id);
    }

    fn refresh_role(&mut self) {
        self.anchor_role = self.dl_tunnels.keys().any(|s| self.prefixes.contains_key(s));
    }

    pub fn apply_update(&mut self, update: &AnchorUpdate) -> Result<(), UserPlaneError> {
        match update {
            AnchorUpdate::Bind {
                session,
                tunnel,
                tunnel_info,
                prefix,
            } => {
                if let Some(info) = tunnel_info {
                    self.tunnels.insert(*tunnel, info.clone());
                }
                if !self.tunnels.contains(*tunnel) {
                    return Err(UserPlaneError::UnknownTunnel(*tunnel));
                }
                let face = self.forwarder.add_face(FaceKind::Tunnel(*tunnel));
                self.dl_tunnels.insert(*session, *tunnel);
                if let Some(prefix) = prefix {
                    self.forwarder.fib_mut().insert(prefix.clone(), face, 0);
                    self.prefixes.insert(*session, prefix.clone());
                }
                self.refresh_role();
                Ok(())
            }
            AnchorUpdate::Redirect {
                session,
                prefix,
                target_anchor,
            } => {
                let via = self.forwarder.add_face(FaceKind::Link(*target_anchor));
                self.forwarder
                    .install_forwarding_label(ForwardingLabel {
                        covered_prefix: prefix.clone(),
                        target_anchor: *target_anchor,
                        via,
                    })
                    .map_err(UserPlaneError::Forwarder)?;
                if let Some(tunnel) = self.dl_tunnels.remove(session) {
                    if let Some(face) = self.forwarder.face_for(FaceKind::Tunnel(tunnel)) {
                        self.forwarder.fib_mut().remove(prefix, face);
                    }
                    self.draining.insert(*session, tunnel);
                }
                self.prefixes.remove(session);
                self.refresh_role();
                Ok(())
            }
            AnchorUpdate::Release { session, prefix } => {
                if let Some(prefix) = prefix {
                    // absent label is fine: the anchor may never have redirected
                    let _ = self.forwarder.remove_forwarding_label(prefix);
                }
                let tunnels: Vec<TunnelId> = self
                    .draining
                    .get(session)
                    .into_iter()
                    .chain(self.dl_tunnels.get(session))
                    .copied()
                    .collect();
                for t in tunnels {
                    self.drop_tunnel(t);
                }
                self.draining.remove(session);
                self.dl_tunnels.remove(session);
                self.prefixes.remove(session);
                self.refresh_role();
                Ok(())
            }
        }
    }

    /// Terminates a session tunnel and hands the ICN PDU to the forwarder
    /// with the tunnel as incoming face.
    pub fn icnap_uplink(&mut self, tp: TunneledPacket, now: SimTime) -> Result<ForwarderActions, UserPlaneError> {
        let (tunnel, inner) = decapsulate(tp);
        if !self.tunnels.contains(tunnel) {
            return Err(UserPlaneError::UnknownTunnel(tunnel));
        }
        let face = self
            .forwarder
            .face_for(FaceKind::Tunnel(tunnel))
            .ok_or(UserPlaneError::UnknownTunnel(tunnel))?;
        match inner {
            Inner::Icn(pdu) => self.forward(pdu, face, now),
            Inner::Ip(_) => Err(UserPlaneError::NotIcn),
        }
    }

    /// Hands a PDU arriving from the data network (or a peer anchor) to the
    /// forwarder.
    pub fn from_network(&mut self, pdu: IcnPdu, peer: NodeId, now: SimTime) -> Result<ForwarderActions, UserPlaneError> {
        let face = self.forwarder.add_face(FaceKind::Link(peer));
        self.forward(pdu, face, now)
    }

    fn forward(&mut self, pdu: IcnPdu, face: crate::forwarder::FaceId, now: SimTime) -> Result<ForwarderActions, UserPlaneError> {
        match pdu {
            IcnPdu::Interest(i) => self
                .forwarder
                .process_interest(i, face, now)
                .map_err(UserPlaneError::Forwarder),
            IcnPdu::Data(d) => Ok(self.forwarder.process_data(d, face, now)),
            IcnPdu::Nack(n) => Ok(self.forwarder.process_nack(n, face, now)),
        }
    }

    /// Downlink encapsulation onto a tunnel known here.
    pub fn encapsulate_dl(&self, inner: Inner, tunnel: TunnelId) -> Result<TunneledPacket, UserPlaneError> {
        self.tunnels
            .encapsulate(inner, tunnel, Direction::Downlink)
            .map_err(|_| UserPlaneError::UnknownTunnel(tunnel))
    }

    /// IP downlink: destination address selects the session tunnel.
    pub fn ip_downlink(&self, pkt: IpPacket) -> Result<TunneledPacket, UserPlaneError> {
        let session = self
            .session_for_addr(pkt.tuple.dst_addr)
            .ok_or(UserPlaneError::NoMatch)?;
        let tunnel = self
            .dl_tunnel(session)
            .or_else(|| self.draining_tunnel(session))
            .ok_or(UserPlaneError::NoMatch)?;
        self.encapsulate_dl(Inner::Ip(pkt), tunnel)
    }

    /// Anything here still tied to `session`, for cleanup sweeps.
    pub fn residue(&self, session: SessionId, prefix: Option<&Name>) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(t) = self.dl_tunnels.get(&session) {
            out.push(format!("dl-tunnel {t}"));
        }
        if let Some(t) = self.draining.get(&session) {
            out.push(format!("draining-tunnel {t}"));
        }
        for (id, info) in self.tunnels.iter() {
            if info.session == Some(session) {
                out.push(format!("tunnel {id}"));
            }
        }
        if let Some(prefix) = prefix {
            for l in self.forwarder.labels() {
                if l.covered_prefix == *prefix {
                    out.push(format!("label {}", l.covered_prefix));
                }
            }
        }
        for face in self.forwarder.faces() {
            if let FaceKind::Tunnel(t) = face.kind {
                let tied = self.tunnels.get(t).is_none_or(|i| i.session == Some(session));
                if tied {
                    for e in self.forwarder.pit().iter() {
                        if e.downstream.iter().any(|(f, _)| *f == face.face_id) {
                            out.push(format!("pit {} via {t}", e.name));
                        }
                    }
                    if self.forwarder.fib().entries().any(|e| e.next_hop == face.face_id) {
                        out.push(format!("fib via {t}"));
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forwarder::Outcome;
    use crate::name::parse_name;
    use crate::packet::{Data, FiveTuple, Interest, Protocol, TunnelSide};

    fn info() -> TunnelInfo {
        TunnelInfo {
            peer: NodeId(3),
            side: TunnelSide::Access,
            association: FiveTuple {
                src_addr: "10.0.0.7".parse().unwrap(),
                dst_addr: "10.1.0.1".parse().unwrap(),
                src_port: 6363,
                dst_port: 6363,
                protocol: Protocol::Udp,
            },
            session: Some(SessionId(1)),
        }
    }

    fn bound_anchor(capacity: usize) -> IcnApState {
        let mut ap = IcnApState::new(capacity);
        ap.apply_update(&AnchorUpdate::Bind {
            session: SessionId(1),
            tunnel: TunnelId(5),
            tunnel_info: Some(info()),
            prefix: Some(parse_name("/ue7").unwrap()),
        })
        .unwrap();
        let n6 = ap.forwarder.add_face(FaceKind::Link(NodeId(50)));
        ap.forwarder.fib_mut().insert(parse_name("/traffic").unwrap(), n6, 0);
        ap
    }

    fn tunneled(ap: &IcnApState, pdu: IcnPdu) -> TunneledPacket {
        ap.tunnels()
            .encapsulate(Inner::Icn(pdu), TunnelId(5), Direction::Uplink)
            .unwrap()
    }

    fn interest(name: &str, nonce: u64) -> IcnPdu {
        IcnPdu::Interest(Interest::new(parse_name(name).unwrap(), nonce))
    }

    fn data(name: &str) -> Data {
        Data {
            name: parse_name(name).unwrap(),
            payload_size: 10,
            producer_id: NodeId(50),
            signed: true,
        }
    }

    #[test]
    fn cache_hit_returns_on_session_tunnel() {
        let mut ap = bound_anchor(4);
        ap.forwarder.cs_mut().insert(data("/traffic/seg1"), 0);
        let tp = tunneled(&ap, interest("/traffic/seg1", 1));
        let actions = ap.icnap_uplink(tp, 1).unwrap();
        assert_eq!(actions.outcome, Outcome::CacheHit);
        let face = actions.emissions[0].face;
        assert_eq!(ap.forwarder.face_kind(face), Some(FaceKind::Tunnel(TunnelId(5))));
    }

    #[test]
    fn miss_goes_to_n6() {
        let mut ap = bound_anchor(4);
        let tp = tunneled(&ap, interest("/traffic/seg1", 1));
        let actions = ap.icnap_uplink(tp, 1).unwrap();
        let face = actions.emissions[0].face;
        assert_eq!(ap.forwarder.face_kind(face), Some(FaceKind::Link(NodeId(50))));
    }

    #[test]
    fn data_from_network_goes_back_down_tunnel() {
        let mut ap = bound_anchor(4);
        let tp = tunneled(&ap, interest("/traffic/seg1", 1));
        ap.icnap_uplink(tp, 1).unwrap();
        let actions = ap
            .from_network(IcnPdu::Data(data("/traffic/seg1")), NodeId(50), 2)
            .unwrap();
        assert_eq!(actions.emissions.len(), 1);
        let face = actions.emissions[0].face;
        assert_eq!(ap.forwarder.face_kind(face), Some(FaceKind::Tunnel(TunnelId(5))));
        let dl = ap.encapsulate_dl(Inner::Icn(actions.emissions[0].pdu.clone()), TunnelId(5)).unwrap();
        assert_eq!(dl.header, info().association.reversed());
        assert_eq!(dl.inner, Inner::Icn(IcnPdu::Data(data("/traffic/seg1"))));
    }

    #[test]
    fn redirect_then_release() {
        let mut ap = bound_anchor(0);
        assert!(ap.anchor_role());
        ap.apply_update(&AnchorUpdate::Redirect {
            session: SessionId(1),
            prefix: parse_name("/ue7").unwrap(),
            target_anchor: NodeId(8),
        })
        .unwrap();
        assert_eq!(ap.dl_tunnel(SessionId(1)), None);
        assert_eq!(ap.draining_tunnel(SessionId(1)), Some(TunnelId(5)));
        assert!(!ap.anchor_role());
        let actions = ap.from_network(interest("/ue7/live", 3), NodeId(50), 1).unwrap();
        assert_eq!(
            ap.forwarder.face_kind(actions.emissions[0].face),
            Some(FaceKind::Link(NodeId(8)))
        );
        ap.apply_update(&AnchorUpdate::Release {
            session: SessionId(1),
            prefix: Some(parse_name("/ue7").unwrap()),
        })
        .unwrap();
        assert!(ap.residue(SessionId(1), Some(&parse_name("/ue7").unwrap())).is_empty());
    }

    #[test]
    fn n4_binding_requires_tunnel() {
        let mut ap = IcnApState::new(0);
        let err = ap.n4_update(&N4Delta {
            bind_sessions: vec![super::super::SessionBinding {
                session: SessionId(1),
                dl_tunnel: TunnelId(3),
                ue_addr: "10.0.0.7".parse().unwrap(),
            }],
            ..Default::default()
        });
        assert_eq!(err, Err(UserPlaneError::DanglingTunnel(TunnelId(3))));
    }
}
