use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::control::{ControlMessage, MsgKind};
use crate::packet::{Addr, NodeId, SessionId, TunnelId};

use super::event::{Event, Message, Payload, Timer};
use super::metrics::{Labels, MetricRecord, Metrics};
use super::topology::Topology;
use super::{EngineError, SimTime};

/// One delivered control message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlRecord {
    pub sent: SimTime,
    pub delivered: SimTime,
    pub corr: u64,
    pub step: Option<u8>,
    pub sender: NodeId,
    pub receiver: NodeId,
    pub tag: &'static str,
    pub kind: MsgKind,
}

pub trait Handler {
    fn handle(&mut self, kernel: &mut Kernel, event: Event);

    /// Per-node state fingerprints for the run summary.
    fn digests(&self, _kernel: &Kernel) -> Vec<(String, u64)> {
        Vec::new()
    }
}

/// Timestamped observation recorded by a node (latencies, milestones).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub time: SimTime,
    pub node: NodeId,
    pub kind: &'static str,
    pub label: String,
    pub value: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSummary {
    pub final_clock: SimTime,
    pub events: u64,
    pub pending: usize,
    pub counters: Vec<MetricRecord>,
    pub digests: Vec<(String, u64)>,
}

impl RunSummary {
    pub fn quiescent(&self) -> bool {
        self.pending == 0
    }

    pub fn check(&self) -> Result<(), EngineError> {
        if self.quiescent() {
            Ok(())
        } else {
            Err(EngineError::Nonquiescent {
                clock: self.final_clock,
                pending: self.pending,
            })
        }
    }
}

pub struct Kernel {
    clock: SimTime,
    next_seq: u64,
    current_seq: u64,
    queue: BinaryHeap<Reverse<Event>>,
    topology: Topology,
    rng: ChaCha8Rng,
    pub metrics: Metrics,
    trace: Vec<String>,
    trace_enabled: bool,
    control_log: Vec<ControlRecord>,
    samples: Vec<Sample>,
    link_tail: BTreeMap<(NodeId, NodeId), SimTime>,
    ip_routes: BTreeMap<Addr, NodeId>,
    next_corr: u64,
    next_tunnel: u32,
    next_session: u32,
    events: u64,
    sent: u64,
    delivered: u64,
    lost: u64,
}

impl Kernel {
    pub fn new(topology: Topology, seed: u64) -> Self {
        Self {
            clock: 0,
            next_seq: 0,
            current_seq: 0,
            queue: BinaryHeap::new(),
            topology,
            rng: ChaCha8Rng::seed_from_u64(seed),
            metrics: Metrics::default(),
            trace: Vec::new(),
            trace_enabled: true,
            control_log: Vec::new(),
            samples: Vec::new(),
            link_tail: BTreeMap::new(),
            ip_routes: BTreeMap::new(),
            next_corr: 1,
            next_tunnel: 1,
            next_session: 1,
            events: 0,
            sent: 0,
            delivered: 0,
            lost: 0,
        }
    }

    pub fn set_trace(&mut self, enabled: bool) {
        self.trace_enabled = enabled;
    }

    pub fn now(&self) -> SimTime {
        self.clock
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn name(&self, id: NodeId) -> &str {
        self.topology.name(id)
    }

    pub fn schedule(&mut self, time: SimTime, target: NodeId, payload: Payload) -> Result<u64, EngineError> {
        if time < self.clock {
            return Err(EngineError::TimeTravel { at: time, clock: self.clock });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(Reverse(Event {
            time,
            seq,
            target,
            payload,
        }));
        Ok(seq)
    }

    pub fn set_timer(&mut self, node: NodeId, delay: SimTime, timer: Timer) {
        let at = self.clock + delay;
        self.schedule(at, node, Payload::Timer(timer))
            .expect("timer in the future");
    }

    /// Puts `msg` on the link between `from` and `to`. Delivery happens after
    /// link latency, optional jitter and the receiver's processing delay;
    /// messages on one directed link never overtake each other.
    pub fn send(&mut self, from: NodeId, to: NodeId, msg: Message) -> Result<(), EngineError> {
        let link = *self
            .topology
            .link(from, to)
            .ok_or(EngineError::NoLink { from, to })?;
        self.sent += 1;
        if msg.is_control() {
            self.metrics.inc("signaling_messages", Labels::none(), 1);
        }
        if link.loss_rate > 0.0 && self.rng.gen::<f64>() < link.loss_rate {
            self.lost += 1;
            self.metrics
                .inc("drops", Labels::node(self.topology.name(from)).cause("link-loss"), 1);
            let line = format!("drop {} {}", self.topology.name(to), msg.describe());
            self.trace_line(from, &line);
            return Ok(());
        }
        let jitter = if link.jitter_ms > 0 {
            self.rng.gen_range(0..=link.jitter_ms)
        } else {
            0
        };
        let processing = self.topology.role(to).map(|r| self.topology.processing(r)).unwrap_or(0);
        let mut at = self.clock + link.latency_ms + jitter + processing;
        let tail = self.link_tail.entry((from, to)).or_insert(0);
        at = at.max(*tail);
        *tail = at;
        let sent = self.clock;
        self.schedule(at, to, Payload::Deliver { from, sent, msg })?;
        Ok(())
    }

    pub fn next_corr(&mut self) -> u64 {
        let c = self.next_corr;
        self.next_corr += 1;
        c
    }

    pub fn alloc_tunnel(&mut self) -> TunnelId {
        let t = TunnelId(self.next_tunnel);
        self.next_tunnel += 1;
        t
    }

    pub fn alloc_session(&mut self) -> SessionId {
        let s = SessionId(self.next_session);
        self.next_session += 1;
        s
    }

    /// Static IP routing: which node owns an address (an anchor for UE
    /// addresses).
    pub fn set_ip_route(&mut self, addr: Addr, owner: NodeId) {
        self.ip_routes.insert(addr, owner);
    }

    pub fn remove_ip_route(&mut self, addr: Addr) {
        self.ip_routes.remove(&addr);
    }

    pub fn ip_owner(&self, addr: Addr) -> Option<NodeId> {
        self.ip_routes.get(&addr).copied()
    }

    pub fn inc(&mut self, name: &str, node: NodeId, by: u64) {
        let labels = Labels::node(self.topology.name(node));
        self.metrics.inc(name, labels, by);
    }

    pub fn inc_cause(&mut self, name: &str, node: NodeId, cause: &str) {
        let labels = Labels::node(self.topology.name(node)).cause(cause);
        self.metrics.inc(name, labels, 1);
    }

    /// Extra trace record attached to the event being processed.
    pub fn trace_line(&mut self, node: NodeId, details: &str) {
        if self.trace_enabled {
            let line = format!("{} {} {} {}", self.clock, self.current_seq, self.topology.name(node), details);
            self.trace.push(line);
        }
    }

    pub fn trace(&self) -> &[String] {
        &self.trace
    }

    pub fn trace_text(&self) -> String {
        let mut out = self.trace.join("\n");
        if !out.is_empty() {
            out.push('\n');
        }
        out
    }

    pub fn record(&mut self, node: NodeId, kind: &'static str, label: impl Into<String>, value: u64) {
        self.samples.push(Sample {
            time: self.clock,
            node,
            kind,
            label: label.into(),
            value,
        });
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn control_log(&self) -> &[ControlRecord] {
        &self.control_log
    }

    pub fn messages_sent(&self) -> u64 {
        self.sent
    }

    pub fn messages_delivered(&self) -> u64 {
        self.delivered
    }

    pub fn messages_lost(&self) -> u64 {
        self.lost
    }

    pub fn messages_queued(&self) -> usize {
        self.queue
            .iter()
            .filter(|Reverse(e)| matches!(e.payload, Payload::Deliver { .. }))
            .count()
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    pub fn run_to_quiescence<H: Handler>(&mut self, handler: &mut H, max_time: SimTime) -> RunSummary {
        while let Some(Reverse(head)) = self.queue.peek() {
            if head.time > max_time {
                break;
            }
            let Reverse(event) = self.queue.pop().expect("peeked");
            debug_assert!(event.time >= self.clock);
            self.clock = event.time;
            self.current_seq = event.seq;
            self.events += 1;
            if let Payload::Deliver { sent, msg, .. } = &event.payload {
                self.delivered += 1;
                if let Message::Control(c) = msg {
                    self.log_control(*sent, c);
                }
            }
            if self.trace_enabled {
                let details = match &event.payload {
                    Payload::Deliver { from, msg, .. } => format!("from={} {}", self.topology.name(*from), msg.describe()),
                    Payload::Timer(t) => t.describe(),
                    Payload::Action(a) => a.describe(),
                };
                let line = format!(
                    "{} {} {} {} {}",
                    event.time,
                    event.seq,
                    self.topology.name(event.target),
                    event.payload.kind(),
                    details
                );
                self.trace.push(line);
            }
            handler.handle(self, event);
        }
        RunSummary {
            final_clock: self.clock,
            events: self.events,
            pending: self.queue.len(),
            counters: self.metrics.records(),
            digests: handler.digests(self),
        }
    }

    fn log_control(&mut self, sent: SimTime, c: &ControlMessage) {
        self.control_log.push(ControlRecord {
            sent,
            delivered: self.clock,
            corr: c.corr,
            step: c.step,
            sender: c.sender,
            receiver: c.receiver,
            tag: c.tag(),
            kind: c.kind(),
        });
    }
}
