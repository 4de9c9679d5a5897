//! CCN-style stateful forwarding engine: FIB, PIT, Content Store and the
//! forwarding-label redirect table used by producer mobility.
//!
//! Interest processing order is: Content Store, then PIT aggregation, then a
//! new PIT entry routed by forwarding label (if one covers the name) or FIB.
//! A name with no route yields a negative acknowledgment on the incoming face.

mod cs;
mod fib;
mod pit;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub use cs::{CsEntry, ContentStore};
pub use fib::{Fib, FibEntry, FibNextHop};
pub use pit::{Pit, PitEntry};

use crate::engine::SimTime;
use crate::name::Name;
use crate::packet::{Data, IcnPdu, Interest, Nack, NackReason, NodeId, TunnelId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FaceId(pub u32);

impl fmt::Display for FaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FaceKind {
    LocalApp,
    Tunnel(TunnelId),
    /// Point-to-point link to a neighbour node.
    Link(NodeId),
}

impl fmt::Display for FaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FaceKind::LocalApp => f.write_str("app"),
            FaceKind::Tunnel(t) => write!(f, "tunnel:{t}"),
            FaceKind::Link(n) => write!(f, "link:{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Face {
    pub face_id: FaceId,
    pub kind: FaceKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForwarderRole {
    /// ICN anchor point; the only role allowed to hold forwarding labels.
    Anchor,
    Router,
    /// Consumer or producer host.
    Endpoint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForwardingLabel {
    pub covered_prefix: Name,
    pub target_anchor: NodeId,
    pub via: FaceId,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ForwarderError {
    #[error("no route for {0}")]
    NoRoute(Name),
    #[error("duplicate nonce {nonce} for {name}")]
    DuplicateNonce { name: Name, nonce: u64 },
    #[error("forwarding labels may only be installed at an anchor")]
    RoleViolation,
    #[error("no forwarding label for {0}")]
    NotFound(Name),
    #[error("unknown face {0}")]
    UnknownFace(FaceId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    CacheHit,
    Aggregated,
    Forwarded { via_label: bool },
    NoRoute,
    Satisfied,
    Unsolicited,
    NackRelayed,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::CacheHit => "cache-hit",
            Outcome::Aggregated => "aggregated",
            Outcome::Forwarded { via_label: true } => "forwarded-label",
            Outcome::Forwarded { via_label: false } => "forwarded",
            Outcome::NoRoute => "no-route",
            Outcome::Satisfied => "satisfied",
            Outcome::Unsolicited => "unsolicited",
            Outcome::NackRelayed => "nack-relayed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Emission {
    pub face: FaceId,
    pub pdu: IcnPdu,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForwarderActions {
    pub outcome: Outcome,
    pub emissions: Vec<Emission>,
}

impl ForwarderActions {
    fn none(outcome: Outcome) -> Self {
        Self {
            outcome,
            emissions: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ForwarderCounters {
    pub interests_in: u64,
    pub cache_hits: u64,
    pub aggregated: u64,
    pub forwarded: u64,
    pub forwarded_by_label: u64,
    pub no_route: u64,
    pub duplicate_nonce: u64,
    pub data_in: u64,
    pub satisfied: u64,
    pub unsolicited: u64,
    pub timeouts: u64,
    pub evictions: u64,
}

#[derive(Debug, Clone)]
pub struct Forwarder {
    role: ForwarderRole,
    faces: BTreeMap<FaceId, FaceKind>,
    next_face: u32,
    fib: Fib,
    pit: Pit,
    cs: ContentStore,
    labels: BTreeMap<Name, ForwardingLabel>,
    counters: ForwarderCounters,
}

impl Forwarder {
    pub fn new(role: ForwarderRole, cs_capacity: usize) -> Self {
        Self {
            role,
            faces: BTreeMap::new(),
            next_face: 1,
            fib: Fib::default(),
            pit: Pit::default(),
            cs: ContentStore::new(cs_capacity),
            labels: BTreeMap::new(),
            counters: ForwarderCounters::default(),
        }
    }

    pub fn role(&self) -> ForwarderRole {
        self.role
    }

    /// Registers a face, reusing the existing id if `kind` is already known.
    pub fn add_face(&mut self, kind: FaceKind) -> FaceId {
        if let Some(id) = self.face_for(kind) {
            return id;
        }
        let id = FaceId(self.next_face);
        self.next_face += 1;
        self.faces.insert(id, kind);
        id
    }

    pub fn face_for(&self, kind: FaceKind) -> Option<FaceId> {
        self.faces.iter().find(|(_, k)| **k == kind).map(|(id, _)| *id)
    }

    pub fn face_kind(&self, id: FaceId) -> Option<FaceKind> {
        self.faces.get(&id).copied()
    }

    pub fn faces(&self) -> impl Iterator<Item = Face> + '_ {
        self.faces.iter().map(|(id, kind)| Face {
            face_id: *id,
            kind: *kind,
        })
    }

    /// Removes a face and every FIB route, label and PIT record through it.
    pub fn remove_face(&mut self, id: FaceId) {
        self.faces.remove(&id);
        self.fib.purge_face(id);
        self.pit.purge_face(id);
        self.labels.retain(|_, l| l.via != id);
    }

    pub fn fib(&self) -> &Fib {
        &self.fib
    }

    pub fn fib_mut(&mut self) -> &mut Fib {
        &mut self.fib
    }

    pub fn pit(&self) -> &Pit {
        &self.pit
    }

    pub fn cs(&self) -> &ContentStore {
        &self.cs
    }

    pub fn cs_mut(&mut self) -> &mut ContentStore {
        &mut self.cs
    }

    pub fn labels(&self) -> impl Iterator<Item = &ForwardingLabel> {
        self.labels.values()
    }

    pub fn counters(&self) -> ForwarderCounters {
        self.counters
    }

    pub fn fib_lookup(&self, name: &Name) -> Result<FaceId, ForwarderError> {
        self.fib
            .lookup(name)
            .ok_or_else(|| ForwarderError::NoRoute(name.clone()))
    }

    fn label_for(&self, name: &Name) -> Option<&ForwardingLabel> {
        (1..=name.len())
            .rev()
            .find_map(|len| self.labels.get(&name.prefix(len)))
    }

    pub fn process_interest(
        &mut self,
        interest: Interest,
        in_face: FaceId,
        now: SimTime,
    ) -> Result<ForwarderActions, ForwarderError> {
        if !self.faces.contains_key(&in_face) {
            return Err(ForwarderError::UnknownFace(in_face));
        }
        self.counters.interests_in += 1;

        if let Some(data) = self.cs.get(&interest.name, now) {
            self.counters.cache_hits += 1;
            return Ok(ForwarderActions {
                outcome: Outcome::CacheHit,
                emissions: vec![Emission {
                    face: in_face,
                    pdu: IcnPdu::Data(data),
                }],
            });
        }

        if self.pit.get(&interest.name).is_some_and(|e| !e.is_live(now)) {
            self.pit.remove(&interest.name);
            self.counters.timeouts += 1;
        }

        let expiry = now + interest.lifetime_ms.max(1);
        if let Some(entry) = self.pit.get_mut(&interest.name) {
            if entry.has_nonce(interest.nonce) {
                self.counters.duplicate_nonce += 1;
                return Err(ForwarderError::DuplicateNonce {
                    name: interest.name,
                    nonce: interest.nonce,
                });
            }
            entry.downstream.push((in_face, interest.nonce));
            entry.expiry = entry.expiry.max(expiry);
            self.counters.aggregated += 1;
            return Ok(ForwarderActions::none(Outcome::Aggregated));
        }

        let (out_face, via_label) = match self.label_for(&interest.name) {
            Some(label) => (label.via, true),
            None => match self.fib.lookup(&interest.name) {
                Some(face) => (face, false),
                None => {
                    self.counters.no_route += 1;
                    return Ok(ForwarderActions {
                        outcome: Outcome::NoRoute,
                        emissions: vec![Emission {
                            face: in_face,
                            pdu: IcnPdu::Nack(Nack {
                                name: interest.name,
                                nonce: interest.nonce,
                                reason: NackReason::NoRoute,
                            }),
                        }],
                    });
                }
            },
        };

        self.pit.insert(PitEntry {
            name: interest.name.clone(),
            downstream: vec![(in_face, interest.nonce)],
            created: now,
            expiry,
            upstream: Some(out_face),
        });
        self.counters.forwarded += 1;
        if via_label {
            self.counters.forwarded_by_label += 1;
        }
        let mut upstream = interest;
        upstream.hop_count += 1;
        Ok(ForwarderActions {
            outcome: Outcome::Forwarded { via_label },
            emissions: vec![Emission {
                face: out_face,
                pdu: IcnPdu::Interest(upstream),
            }],
        })
    }

    pub fn process_data(&mut self, data: Data, _in_face: FaceId, now: SimTime) -> ForwarderActions {
        self.counters.data_in += 1;
        let entry = match self.pit.remove(&data.name) {
            Some(entry) if entry.is_live(now) => entry,
            Some(_) => {
                self.counters.timeouts += 1;
                self.counters.unsolicited += 1;
                return ForwarderActions::none(Outcome::Unsolicited);
            }
            None => {
                self.counters.unsolicited += 1;
                return ForwarderActions::none(Outcome::Unsolicited);
            }
        };
        self.counters.satisfied += 1;
        if self.cs.insert(data.clone(), now).is_some() {
            self.counters.evictions += 1;
        }
        ForwarderActions {
            outcome: Outcome::Satisfied,
            emissions: entry
                .faces()
                .into_iter()
                .map(|face| Emission {
                    face,
                    pdu: IcnPdu::Data(data.clone()),
                })
                .collect(),
        }
    }

    /// A negative acknowledgment from upstream consumes the PIT entry and is
    /// relayed to every downstream face.
    pub fn process_nack(&mut self, nack: Nack, _in_face: FaceId, now: SimTime) -> ForwarderActions {
        match self.pit.remove(&nack.name) {
            Some(entry) if entry.is_live(now) => ForwarderActions {
                outcome: Outcome::NackRelayed,
                emissions: entry
                    .downstream
                    .iter()
                    .map(|(face, nonce)| Emission {
                        face: *face,
                        pdu: IcnPdu::Nack(Nack {
                            name: nack.name.clone(),
                            nonce: *nonce,
                            reason: nack.reason,
                        }),
                    })
                    .collect(),
            },
            _ => ForwarderActions::none(Outcome::Unsolicited),
        }
    }

    pub fn install_forwarding_label(&mut self, label: ForwardingLabel) -> Result<(), ForwarderError> {
        if self.role != ForwarderRole::Anchor {
            return Err(ForwarderError::RoleViolation);
        }
        if !self.faces.contains_key(&label.via) {
            return Err(ForwarderError::UnknownFace(label.via));
        }
        self.labels.insert(label.covered_prefix.clone(), label);
        Ok(())
    }

    pub fn remove_forwarding_label(&mut self, prefix: &Name) -> Result<ForwardingLabel, ForwarderError> {
        self.labels
            .remove(prefix)
            .ok_or_else(|| ForwarderError::NotFound(prefix.clone()))
    }

    /// Removes PIT entries with `expiry <= now`; names come back in name order.
    pub fn expire_pit(&mut self, now: SimTime) -> Vec<Name> {
        let expired = self.pit.expire(now);
        self.counters.timeouts += expired.len() as u64;
        expired
    }

    /// One text record per FIB route, PIT entry, CS entry and label.
    pub fn dump(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (id, kind) in &self.faces {
            out.push(format!("face {id} {kind}"));
        }
        if let Some(face) = self.fib.default_route() {
            out.push(format!("fib-default {face}"));
        }
        for e in self.fib.entries() {
            out.push(format!("fib {} {} cost={}", e.prefix, e.next_hop, e.cost));
        }
        for e in self.pit.iter() {
            let down: Vec<String> = e.downstream.iter().map(|(f, n)| format!("{f}#{n}")).collect();
            out.push(format!("pit {} down=[{}] expiry={}", e.name, down.join(","), e.expiry));
        }
        for name in self.cs.names_by_recency() {
            out.push(format!("cs {name}"));
        }
        for l in self.labels.values() {
            out.push(format!("label {} -> {} via {}", l.covered_prefix, l.target_anchor, l.via));
        }
        out
    }
}
