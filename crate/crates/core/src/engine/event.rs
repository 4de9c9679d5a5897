use std::cmp::Ordering;

use crate::control::{ControlMessage, PolicyDelta};
use crate::name::Name;
use crate::packet::{IcnPdu, Inner, IpPacket, NodeId, SessionId, TunneledPacket};

use super::SimTime;

/// Anything that crosses a link.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    Control(ControlMessage),
    /// N3/N9 tunnel hop.
    Tunnel(TunneledPacket),
    /// Abstract radio hop between a UE and a RAN.
    Radio {
        ue: NodeId,
        session: SessionId,
        inner: Inner,
    },
    /// Native ICN hop (N6, anchor to anchor, data network).
    Icn(IcnPdu),
    /// Native IP hop (N6).
    Ip(IpPacket),
    /// Processed sensor data moving along the traffic pipeline.
    Publication { name: Name, size: u32 },
}

impl Message {
    pub fn is_control(&self) -> bool {
        matches!(self, Message::Control(_))
    }

    pub fn describe(&self) -> String {
        match self {
            Message::Control(c) => {
                let step = c.step.map(|s| s.to_string()).unwrap_or_else(|| "-".into());
                format!("ctl {} {} corr={} step={}", c.tag(), c.kind(), c.corr, step)
            }
            Message::Tunnel(tp) => format!("tun {} {} {}", tp.tunnel_id, tp.inner.kind(), tp.inner.label()),
            Message::Radio { session, inner, .. } => format!("radio {session} {} {}", inner.kind(), inner.label()),
            Message::Icn(p) => format!("icn {} {}", p.kind(), p.name()),
            Message::Ip(p) => format!("ip {} {}", p.body.kind(), p.tuple),
            Message::Publication { name, size } => format!("pub {name} {size}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Timer {
    /// Sweep expired PIT entries.
    PitExpiry,
    ConsumerTick,
    InterestTimeout { name: Name, attempt: u32 },
    RequestTimeout { id: u64, attempt: u32 },
    /// Source-side release after the handover guard interval.
    ReleaseGuard { ue: NodeId },
    /// Old-anchor label kept until traffic steered at it has drained.
    LabelDrain { corr: u64 },
    /// Application-level gateway translation at the edge sensor.
    AlgRelay { name: Name, size: u32 },
}

impl Timer {
    pub fn describe(&self) -> String {
        match self {
            Timer::PitExpiry => "pit-expiry".into(),
            Timer::ConsumerTick => "consumer-tick".into(),
            Timer::InterestTimeout { name, attempt } => format!("interest-timeout {name} {attempt}"),
            Timer::RequestTimeout { id, attempt } => format!("request-timeout {id} {attempt}"),
            Timer::ReleaseGuard { ue } => format!("release-guard {ue}"),
            Timer::LabelDrain { corr } => format!("label-drain {corr}"),
            Timer::AlgRelay { name, .. } => format!("alg-relay {name}"),
        }
    }
}

/// Scripted workload step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    UeAttach,
    Request { object: Name },
    SensorPublish { object: Name, size: u32 },
    TriggerHandover { target_ran: NodeId },
    Detach,
    PushPolicy { delta: PolicyDelta },
    StartConsumer,
}

impl Action {
    pub fn describe(&self) -> String {
        match self {
            Action::UeAttach => "ue_attach".into(),
            Action::Request { object } => format!("request {object}"),
            Action::SensorPublish { object, size } => format!("sensor_publish {object} {size}"),
            Action::TriggerHandover { target_ran } => format!("trigger_handover {target_ran}"),
            Action::Detach => "detach".into(),
            Action::PushPolicy { delta } => format!("push_policy {}", delta.patches.len()),
            Action::StartConsumer => "start_consumer".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    Deliver { from: NodeId, sent: SimTime, msg: Message },
    Timer(Timer),
    Action(Action),
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Deliver { .. } => "recv",
            Payload::Timer(_) => "timer",
            Payload::Action(_) => "action",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Event {
    pub time: SimTime,
    pub seq: u64,
    pub target: NodeId,
    pub payload: Payload,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        (self.time, self.seq) == (other.time, other.seq)
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.time, self.seq).cmp(&(other.time, other.seq))
    }
}
