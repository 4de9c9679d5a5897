use std::collections::BTreeMap;

use crate::name::Name;

use super::FaceId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FibNextHop {
    pub face: FaceId,
    pub cost: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FibEntry {
    pub prefix: Name,
    pub next_hop: FaceId,
    pub cost: u32,
}

/// Longest-prefix-match table. At most one next hop per (prefix, face).
#[derive(Debug, Clone, Default)]
pub struct Fib {
    routes: BTreeMap<Name, Vec<FibNextHop>>,
    default_route: Option<FaceId>,
}

impl Fib {
    /// Adds or updates the (prefix, face) next hop.
    pub fn insert(&mut self, prefix: Name, face: FaceId, cost: u32) {
        let hops = self.routes.entry(prefix).or_default();
        match hops.iter_mut().find(|h| h.face == face) {
            Some(hop) => hop.cost = cost,
            None => hops.push(FibNextHop { face, cost }),
        }
    }

    pub fn remove(&mut self, prefix: &Name, face: FaceId) -> bool {
        let Some(hops) = self.routes.get_mut(prefix) else {
            return false;
        };
        let before = hops.len();
        hops.retain(|h| h.face != face);
        let removed = hops.len() != before;
        if hops.is_empty() {
            self.routes.remove(prefix);
        }
        removed
    }

    pub fn remove_prefix(&mut self, prefix: &Name) -> bool {
        self.routes.remove(prefix).is_some()
    }

    /// Drops every next hop through `face`.
    pub fn purge_face(&mut self, face: FaceId) {
        self.routes.retain(|_, hops| {
            hops.retain(|h| h.face != face);
            !hops.is_empty()
        });
        if self.default_route == Some(face) {
            self.default_route = None;
        }
    }

    pub fn set_default(&mut self, face: Option<FaceId>) {
        self.default_route = face;
    }

    pub fn default_route(&self) -> Option<FaceId> {
        self.default_route
    }

    /// Next hop of the longest matching prefix; ties go to the lower cost,
    /// then the lower face id. Falls back to the default route.
    pub fn lookup(&self, name: &Name) -> Option<FaceId> {
        (1..=name.len())
            .rev()
            .find_map(|len| self.routes.get(&name.prefix(len)))
            .and_then(|hops| hops.iter().min_by_key(|h| (h.cost, h.face)).map(|h| h.face))
            .or(self.default_route)
    }

    pub fn entries(&self) -> impl Iterator<Item = FibEntry> + '_ {
        self.routes.iter().flat_map(|(prefix, hops)| {
            hops.iter().map(move |h| FibEntry {
                prefix: prefix.clone(),
                next_hop: h.face,
                cost: h.cost,
            })
        })
    }

    pub fn len(&self) -> usize {
        self.routes.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.routes.is_empty()
    }
}
