//! Deterministic discrete-event simulator of a 5G core extended with
//! information-centric networking: named forwarding at anchor points,
//! ICN PDU sessions, make-before-break producer handover and an edge
//! computing comparison between IP and ICN service delivery.

pub mod control;
pub mod engine;
pub mod forwarder;
pub mod name;
pub mod nodes;
pub mod packet;
pub mod scenario;
pub mod user_plane;
