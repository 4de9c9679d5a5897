use std::collections::BTreeMap;

use crate::engine::SimTime;
use crate::name::Name;
use crate::packet::Data;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsEntry {
    pub name: Name,
    pub data: Data,
    pub last_used: SimTime,
    tick: u64,
}

/// LRU content store. Recency is tracked with a use counter so entries
/// touched at the same simulated instant still have a strict order.
#[derive(Debug, Clone, Default)]
pub struct ContentStore {
    capacity: usize,
    entries: BTreeMap<Name, CsEntry>,
    recency: BTreeMap<u64, Name>,
    next_tick: u64,
}

impl ContentStore {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            ..Default::default()
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, name: &Name) -> bool {
        self.entries.contains_key(name)
    }

    fn touch(&mut self, name: &Name, now: SimTime) {
        let tick = self.next_tick;
        self.next_tick += 1;
        if let Some(entry) = self.entries.get_mut(name) {
            if self.recency.get(&entry.tick) == Some(name) {
                self.recency.remove(&entry.tick);
            }
            entry.tick = tick;
            entry.last_used = now;
            self.recency.insert(tick, name.clone());
        }
    }

    /// Exact-name lookup; a hit refreshes recency.
    pub fn get(&mut self, name: &Name, now: SimTime) -> Option<Data> {
        if !self.entries.contains_key(name) {
            return None;
        }
        self.touch(name, now);
        self.entries.get(name).map(|e| e.data.clone())
    }

    /// Inserts, evicting the least recently used entry when full. Returns the
    /// evicted name, if any.
    pub fn insert(&mut self, data: Data, now: SimTime) -> Option<Name> {
        if self.capacity == 0 {
            return None;
        }
        let name = data.name.clone();
        if let Some(entry) = self.entries.get_mut(&name) {
            entry.data = data;
            self.touch(&name, now);
            return None;
        }
        let evicted = if self.entries.len() >= self.capacity {
            self.lru().cloned().inspect(|victim| {
                self.remove(victim);
            })
        } else {
            None
        };
        self.entries.insert(
            name.clone(),
            CsEntry {
                name: name.clone(),
                data,
                last_used: now,
                tick: u64::MAX,
            },
        );
        self.touch(&name, now);
        evicted
    }

    pub fn remove(&mut self, name: &Name) -> Option<Data> {
        let entry = self.entries.remove(name)?;
        self.recency.remove(&entry.tick);
        Some(entry.data)
    }

    /// Current eviction victim.
    pub fn lru(&self) -> Option<&Name> {
        self.recency.values().next()
    }

    /// Names from least to most recently used.
    pub fn names_by_recency(&self) -> Vec<Name> {
        self.recency.values().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &CsEntry> {
        self.entries.values()
    }
}
