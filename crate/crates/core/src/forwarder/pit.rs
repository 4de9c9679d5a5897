use std::collections::BTreeMap;

use crate::engine::SimTime;
use crate::name::Name;

use super::FaceId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PitEntry {
    pub name: Name,
    /// (face, nonce) pairs awaiting Data, in arrival order.
    pub downstream: Vec<(FaceId, u64)>,
    pub created: SimTime,
    pub expiry: SimTime,
    pub upstream: Option<FaceId>,
}

impl PitEntry {
    pub fn is_live(&self, now: SimTime) -> bool {
        self.expiry > now
    }

    pub fn has_nonce(&self, nonce: u64) -> bool {
        self.downstream.iter().any(|(_, n)| *n == nonce)
    }

    /// Downstream faces, deduplicated, in first-arrival order.
    pub fn faces(&self) -> Vec<FaceId> {
        let mut faces = Vec::new();
        for (face, _) in &self.downstream {
            if !faces.contains(face) {
                faces.push(*face);
            }
        }
        faces
    }
}

#[derive(Debug, Clone, Default)]
pub struct Pit {
    entries: BTreeMap<Name, PitEntry>,
}

impl Pit {
    pub fn get(&self, name: &Name) -> Option<&PitEntry> {
        self.entries.get(name)
    }

    pub fn get_mut(&mut self, name: &Name) -> Option<&mut PitEntry> {
        self.entries.get_mut(name)
    }

    pub fn insert(&mut self, entry: PitEntry) {
        self.entries.insert(entry.name.clone(), entry);
    }

    pub fn remove(&mut self, name: &Name) -> Option<PitEntry> {
        self.entries.remove(name)
    }

    /// Removes entries with `expiry <= now`, returned in name order.
    pub fn expire(&mut self, now: SimTime) -> Vec<Name> {
        let expired: Vec<Name> = self
            .entries
            .values()
            .filter(|e| !e.is_live(now))
            .map(|e| e.name.clone())
            .collect();
        for name in &expired {
            self.entries.remove(name);
        }
        expired
    }

    /// Drops downstream records on `face`; entries left with no downstream
    /// are removed.
    pub fn purge_face(&mut self, face: FaceId) -> usize {
        let before = self.entries.len();
        self.entries.retain(|_, e| {
            e.downstream.retain(|(f, _)| *f != face);
            if e.upstream == Some(face) {
                e.upstream = None;
            }
            !e.downstream.is_empty()
        });
        before - self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &PitEntry> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
