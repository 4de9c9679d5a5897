use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::packet::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Ue,
    Ran,
    #[serde(rename = "ul-cl")]
    UlCl,
    #[serde(rename = "icn-ap")]
    IcnAp,
    /// Plain IP session anchor.
    Upf,
    #[serde(rename = "icn-dn-router")]
    IcnDnRouter,
    Amf,
    Smf,
    #[serde(rename = "icn-smf")]
    IcnSmf,
    #[serde(rename = "icn-af")]
    IcnAf,
    Nssf,
    #[serde(rename = "pcf-udm")]
    PcfUdm,
    Nrs,
    #[serde(rename = "app-server")]
    AppServer,
}

impl Role {
    pub const ALL: [Role; 14] = [
        Role::Ue,
        Role::Ran,
        Role::UlCl,
        Role::IcnAp,
        Role::Upf,
        Role::IcnDnRouter,
        Role::Amf,
        Role::Smf,
        Role::IcnSmf,
        Role::IcnAf,
        Role::Nssf,
        Role::PcfUdm,
        Role::Nrs,
        Role::AppServer,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Ue => "ue",
            Role::Ran => "ran",
            Role::UlCl => "ul-cl",
            Role::IcnAp => "icn-ap",
            Role::Upf => "upf",
            Role::IcnDnRouter => "icn-dn-router",
            Role::Amf => "amf",
            Role::Smf => "smf",
            Role::IcnSmf => "icn-smf",
            Role::IcnAf => "icn-af",
            Role::Nssf => "nssf",
            Role::PcfUdm => "pcf-udm",
            Role::Nrs => "nrs",
            Role::AppServer => "app-server",
        }
    }

    /// Pure control-plane functions.
    pub fn is_control(self) -> bool {
        matches!(
            self,
            Role::Amf | Role::Smf | Role::IcnSmf | Role::IcnAf | Role::Nssf | Role::PcfUdm | Role::Nrs
        )
    }

    pub fn is_anchor(self) -> bool {
        matches!(self, Role::IcnAp | Role::Upf)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    User,
    Control,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub latency_ms: u64,
    pub loss_rate: f64,
    pub jitter_ms: u64,
}

impl Link {
    pub fn new(latency_ms: u64) -> Self {
        Self {
            latency_ms,
            loss_rate: 0.0,
            jitter_ms: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeInfo {
    pub id: NodeId,
    pub name: String,
    pub role: Role,
}

/// Nodes plus undirected latency links.
#[derive(Debug, Clone, Default)]
pub struct Topology {
    nodes: BTreeMap<NodeId, NodeInfo>,
    by_name: BTreeMap<String, NodeId>,
    links: BTreeMap<(NodeId, NodeId), Link>,
    adjacency: BTreeMap<NodeId, BTreeSet<NodeId>>,
    processing_ms: BTreeMap<Role, u64>,
}

fn key(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Topology {
    pub fn add_node(&mut self, id: NodeId, name: &str, role: Role) {
        self.nodes.insert(
            id,
            NodeInfo {
                id,
                name: name.to_string(),
                role,
            },
        );
        self.by_name.insert(name.to_string(), id);
        self.adjacency.entry(id).or_default();
    }

    /// Adds or replaces the link between `a` and `b`.
    pub fn add_link(&mut self, a: NodeId, b: NodeId, link: Link) {
        self.links.insert(key(a, b), link);
        self.adjacency.entry(a).or_default().insert(b);
        self.adjacency.entry(b).or_default().insert(a);
    }

    pub fn set_link_latency(&mut self, a: NodeId, b: NodeId, latency_ms: u64) {
        if let Some(l) = self.links.get_mut(&key(a, b)) {
            l.latency_ms = latency_ms;
        }
    }

    pub fn set_processing(&mut self, role: Role, ms: u64) {
        self.processing_ms.insert(role, ms);
    }

    pub fn processing(&self, role: Role) -> u64 {
        self.processing_ms.get(&role).copied().unwrap_or(0)
    }

    pub fn link(&self, a: NodeId, b: NodeId) -> Option<&Link> {
        self.links.get(&key(a, b))
    }

    pub fn links(&self) -> impl Iterator<Item = (NodeId, NodeId, &Link)> {
        self.links.iter().map(|((a, b), l)| (*a, *b, l))
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeInfo> {
        self.nodes.get(&id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &NodeInfo> {
        self.nodes.values()
    }

    pub fn id(&self, name: &str) -> Option<NodeId> {
        self.by_name.get(name).copied()
    }

    pub fn name(&self, id: NodeId) -> &str {
        self.nodes.get(&id).map(|n| n.name.as_str()).unwrap_or("?")
    }

    pub fn role(&self, id: NodeId) -> Option<Role> {
        self.nodes.get(&id).map(|n| n.role)
    }

    pub fn with_role(&self, role: Role) -> Vec<NodeId> {
        self.nodes.values().filter(|n| n.role == role).map(|n| n.id).collect()
    }

    pub fn neighbors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adjacency.get(&id).into_iter().flatten().copied()
    }

    pub fn plane(&self, a: NodeId, b: NodeId) -> Plane {
        let control = |n| self.role(n).is_some_and(Role::is_control);
        if control(a) || control(b) {
            Plane::Control
        } else {
            Plane::User
        }
    }

    /// Breadth-first search over user-plane links. UEs are endpoints only,
    /// never transit. Returns (hop distance, first hop) for every reachable
    /// node; neighbours are visited in id order so first hops are stable.
    fn user_bfs(&self, from: NodeId) -> BTreeMap<NodeId, (u32, NodeId)> {
        let mut seen = BTreeMap::new();
        let mut queue = VecDeque::new();
        seen.insert(from, (0, from));
        queue.push_back(from);
        while let Some(n) = queue.pop_front() {
            let (d, first) = seen[&n];
            if n != from && self.role(n) == Some(Role::Ue) {
                continue;
            }
            for m in self.neighbors(n) {
                if seen.contains_key(&m) || self.plane(n, m) == Plane::Control {
                    continue;
                }
                let hop = if n == from { m } else { first };
                seen.insert(m, (d + 1, hop));
                queue.push_back(m);
            }
        }
        seen
    }

    pub fn user_hops(&self, from: NodeId, to: NodeId) -> Option<u32> {
        self.user_bfs(from).get(&to).map(|(d, _)| *d)
    }

    pub fn next_hop(&self, from: NodeId, to: NodeId) -> Option<NodeId> {
        if from == to {
            return None;
        }
        self.user_bfs(from).get(&to).map(|(_, h)| *h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hops_skip_control_links_and_ues() {
        let mut t = Topology::default();
        t.add_node(NodeId(1), "ran-a", Role::Ran);
        t.add_node(NodeId(2), "ran-b", Role::Ran);
        t.add_node(NodeId(3), "ue", Role::Ue);
        t.add_node(NodeId(4), "amf", Role::Amf);
        t.add_node(NodeId(5), "ulcl", Role::UlCl);
        t.add_link(NodeId(3), NodeId(1), Link::new(1));
        t.add_link(NodeId(3), NodeId(2), Link::new(1));
        t.add_link(NodeId(1), NodeId(4), Link::new(1));
        t.add_link(NodeId(2), NodeId(4), Link::new(1));
        t.add_link(NodeId(1), NodeId(5), Link::new(1));
        assert_eq!(t.user_hops(NodeId(1), NodeId(5)), Some(1));
        assert_eq!(t.user_hops(NodeId(2), NodeId(5)), None);
        assert_eq!(t.user_hops(NodeId(2), NodeId(3)), Some(1));
        assert_eq!(t.next_hop(NodeId(3), NodeId(5)), Some(NodeId(1)));
        assert_eq!(t.plane(NodeId(1), NodeId(4)), Plane::Control);
    }
}
