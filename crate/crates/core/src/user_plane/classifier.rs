use crate::packet::{
    Addr, Direction, FiveTuple, Protocol, SessionId, TunnelId, TunnelInfo, TunnelSide, TunnelTable,
};

use super::UserPlaneError;

/// Five-tuple predicate; `None` fields are wildcards.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FiveTupleMatch {
    pub src_addr: Option<Addr>,
    pub dst_addr: Option<Addr>,
    pub src_port: Option<u16>,
    pub dst_port: Option<u16>,
    pub protocol: Option<Protocol>,
}

impl FiveTupleMatch {
    pub fn dst(addr: Addr) -> Self {
        Self {
            dst_addr: Some(addr),
            ..Self::default()
        }
    }

    pub fn src(addr: Addr) -> Self {
        Self {
            src_addr: Some(addr),
            ..Self::default()
        }
    }

    pub fn matches(&self, t: &FiveTuple) -> bool {
        self.src_addr.is_none_or(|a| a == t.src_addr)
            && self.dst_addr.is_none_or(|a| a == t.dst_addr)
            && self.src_port.is_none_or(|p| p == t.src_port)
            && self.dst_port.is_none_or(|p| p == t.dst_port)
            && self.protocol.is_none_or(|p| p == t.protocol)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifierRule {
    pub matcher: FiveTupleMatch,
    pub action_tunnel: TunnelId,
    pub priority: i32,
    pub session: Option<SessionId>,
    order: u64,
}

impl ClassifierRule {
    pub fn order(&self) -> u64 {
        self.order
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSpec {
    pub direction: Direction,
    pub matcher: FiveTupleMatch,
    pub action_tunnel: TunnelId,
    pub priority: i32,
    pub session: Option<SessionId>,
}

/// Atomic change to a user-plane function's tunnel and rule tables.
/// Removals are applied before additions. Removing a tunnel also removes
/// every rule that steers into it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct N4Delta {
    pub add_tunnels: Vec<(TunnelId, TunnelInfo)>,
    pub remove_tunnels: Vec<TunnelId>,
    pub add_rules: Vec<RuleSpec>,
    pub remove_rules_for: Vec<SessionId>,
    /// Anchor side only: session bindings.
    pub bind_sessions: Vec<SessionBinding>,
    pub unbind_sessions: Vec<SessionId>,
}

impl N4Delta {
    pub fn is_empty(&self) -> bool {
        *self == N4Delta::default()
    }

    /// Tunnels referenced by this delta.
    pub fn tunnels(&self) -> Vec<TunnelId> {
        let mut out: Vec<TunnelId> = self.add_tunnels.iter().map(|(t, _)| *t).collect();
        out.extend(&self.remove_tunnels);
        out.sort();
        out.dedup();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionBinding {
    pub session: SessionId,
    pub dl_tunnel: TunnelId,
    pub ue_addr: Addr,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UlClState {
    ul_rules: Vec<ClassifierRule>,
    dl_rules: Vec<ClassifierRule>,
    tunnels: TunnelTable,
    next_order: u64,
}

impl UlClState {
    pub fn tunnels(&self) -> &TunnelTable {
        &self.tunnels
    }

    pub fn rules(&self, direction: Direction) -> &[ClassifierRule] {
        match direction {
            Direction::Uplink => &self.ul_rules,
            Direction::Downlink => &self.dl_rules,
        }
    }

    pub fn rules_for_session(&self, session: SessionId) -> usize {
        self.ul_rules
            .iter()
            .chain(&self.dl_rules)
            .filter(|r| r.session == Some(session))
            .count()
    }

    /// Direction implied by the tunnel a packet arrived on.
    pub fn direction_of(&self, tunnel: TunnelId) -> Option<Direction> {
        self.tunnels.get(tunnel).map(|info| match info.side {
            TunnelSide::Access => Direction::Uplink,
            TunnelSide::Core => Direction::Downlink,
        })
    }

    /// Highest priority matching rule wins; ties go to the earliest
    /// installed rule.
    pub fn classify(&self, header: &FiveTuple, direction: Direction) -> Result<TunnelId, UserPlaneError> {
        self.rules(direction)
            .iter()
            .filter(|r| r.matcher.matches(header))
            .min_by_key(|r| (std::cmp::Reverse(r.priority), r.order))
            .map(|r| r.action_tunnel)
            .ok_or(UserPlaneError::NoMatch)
    }

    pub fn n4_update(&mut self, delta: &N4Delta) -> Result<(), UserPlaneError> {
        let mut next = self.clone();
        next.apply(delta);
        next.check()?;
        *self = next;
        Ok(())
    }

    fn apply(&mut self, delta: &N4Delta) {
        for session in &delta.remove_rules_for {
            self.ul_rules.retain(|r| r.session != Some(*session));
            self.dl_rules.retain(|r| r.session != Some(*session));
        }
        for tunnel in &delta.remove_tunnels {
            self.tunnels.remove(*tunnel);
            self.ul_rules.retain(|r| r.action_tunnel != *tunnel);
            self.dl_rules.retain(|r| r.action_tunnel != *tunnel);
        }
        for (id, info) in &delta.add_tunnels {
            self.tunnels.insert(*id, info.clone());
        }
        for spec in &delta.add_rules {
            let rule = ClassifierRule {
                matcher: spec.matcher,
                action_tunnel: spec.action_tunnel,
                priority: spec.priority,
                session: spec.session,
                order: self.next_order,
            };
            self.next_order += 1;
            let rules = match spec.direction {
                Direction::Uplink => &mut self.ul_rules,
                Direction::Downlink => &mut self.dl_rules,
            };
            rules.retain(|r| !(r.matcher == rule.matcher && r.priority == rule.priority));
            rules.push(rule);
        }
    }

    /// Every rule must steer into a known tunnel.
    pub fn check(&self) -> Result<(), UserPlaneError> {
        match self
            .ul_rules
            .iter()
            .chain(&self.dl_rules)
            .find(|r| !self.tunnels.contains(r.action_tunnel))
        {
            Some(r) => Err(UserPlaneError::DanglingTunnel(r.action_tunnel)),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packet::NodeId;

    fn addr(s: &str) -> Addr {
        s.parse().unwrap()
    }

    fn tuple(src: &str, dst: &str) -> FiveTuple {
        FiveTuple {
            src_addr: addr(src),
            dst_addr: addr(dst),
            src_port: 1000,
            dst_port: 2000,
            protocol: Protocol::Udp,
        }
    }

    fn info(side: TunnelSide) -> TunnelInfo {
        TunnelInfo {
            peer: NodeId(1),
            side,
            association: tuple("10.0.0.1", "10.0.0.5"),
            session: Some(SessionId(1)),
        }
    }

    fn rule(direction: Direction, matcher: FiveTupleMatch, tunnel: u32, priority: i32) -> RuleSpec {
        RuleSpec {
            direction,
            matcher,
            action_tunnel: TunnelId(tunnel),
            priority,
            session: Some(SessionId(1)),
        }
    }

    fn with_tunnels(ids: &[u32]) -> UlClState {
        let mut s = UlClState::default();
        s.n4_update(&N4Delta {
            add_tunnels: ids.iter().map(|i| (TunnelId(*i), info(TunnelSide::Core))).collect(),
            ..Default::default()
        })
        .unwrap();
        s
    }

    #[test]
    fn equality_match() {
        let mut s = with_tunnels(&[7]);
        s.n4_update(&N4Delta {
            add_rules: vec![rule(Direction::Uplink, FiveTupleMatch::dst(addr("10.0.0.5")), 7, 1)],
            ..Default::default()
        })
        .unwrap();
        assert_eq!(s.classify(&tuple("10.0.0.1", "10.0.0.5"), Direction::Uplink), Ok(TunnelId(7)));
        assert_eq!(
            s.classify(&tuple("10.0.0.1", "10.0.0.9"), Direction::Uplink),
            Err(UserPlaneError::NoMatch)
        );
        assert_eq!(
            s.classify(&tuple("10.0.0.1", "10.0.0.5"), Direction::Downlink),
            Err(UserPlaneError::NoMatch)
        );
    }

    #[test]
    fn priority_then_insertion_order() {
        let mut s = with_tunnels(&[1, 2, 3]);
        s.n4_update(&N4Delta {
            add_rules: vec![
                rule(Direction::Uplink, FiveTupleMatch::dst(addr("10.0.0.5")), 1, 5),
                rule(Direction::Uplink, FiveTupleMatch::default(), 2, 9),
                rule(Direction::Uplink, FiveTupleMatch::src(addr("10.0.0.1")), 3, 9),
            ],
            ..Default::default()
        })
        .unwrap();
        assert_eq!(s.classify(&tuple("10.0.0.1", "10.0.0.5"), Direction::Uplink), Ok(TunnelId(2)));
    }

    #[test]
    fn tunnel_then_rule_accepted() {
        let mut s = UlClState::default();
        s.n4_update(&N4Delta {
            add_tunnels: vec![(TunnelId(2), info(TunnelSide::Core))],
            add_rules: vec![rule(Direction::Uplink, FiveTupleMatch::default(), 2, 1)],
            ..Default::default()
        })
        .unwrap();
        assert_eq!(s.rules(Direction::Uplink).len(), 1);
    }

    #[test]
    fn dangling_rule_rejected_atomically() {
        let mut s = with_tunnels(&[1]);
        let before = s.clone();
        let err = s.n4_update(&N4Delta {
            add_tunnels: vec![(TunnelId(4), info(TunnelSide::Access))],
            add_rules: vec![rule(Direction::Uplink, FiveTupleMatch::default(), 9, 1)],
            ..Default::default()
        });
        assert_eq!(err, Err(UserPlaneError::DanglingTunnel(TunnelId(9))));
        assert_eq!(s, before);
    }

    #[test]
    fn removing_session_tunnels_clears_rules() {
        let mut s = with_tunnels(&[1, 2]);
        s.n4_update(&N4Delta {
            add_rules: vec![
                rule(Direction::Uplink, FiveTupleMatch::default(), 1, 1),
                rule(Direction::Downlink, FiveTupleMatch::default(), 2, 1),
            ],
            ..Default::default()
        })
        .unwrap();
        s.n4_update(&N4Delta {
            remove_tunnels: vec![TunnelId(1), TunnelId(2)],
            ..Default::default()
        })
        .unwrap();
        assert_eq!(s.rules_for_session(SessionId(1)), 0);
        assert!(s.tunnels().is_empty());
    }

    #[test]
    fn same_match_and_priority_replaces() {
        let mut s = with_tunnels(&[1, 2]);
        let m = FiveTupleMatch::dst(addr("10.0.0.5"));
        s.n4_update(&N4Delta {
            add_rules: vec![rule(Direction::Downlink, m, 1, 3), rule(Direction::Downlink, m, 2, 3)],
            ..Default::default()
        })
        .unwrap();
        assert_eq!(s.rules(Direction::Downlink).len(), 1);
        assert_eq!(s.classify(&tuple("1.1.1.1", "10.0.0.5"), Direction::Downlink), Ok(TunnelId(2)));
    }
}
