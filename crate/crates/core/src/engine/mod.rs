//! Discrete-event kernel: integer-millisecond clock, (time, seq)-ordered
//! queue, latency links and counters.

mod event;
mod kernel;
mod metrics;
mod topology;

use thiserror::Error;

pub use event::{Action, Event, Message, Payload, Timer};
pub use kernel::{ControlRecord, Handler, Kernel, RunSummary, Sample};
pub use metrics::{Labels, MetricRecord, Metrics};
pub use topology::{Link, NodeInfo, Plane, Role, Topology};

use crate::packet::NodeId;

/// Simulated milliseconds.
pub type SimTime = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("event at {at} is before the clock ({clock})")]
    TimeTravel { at: SimTime, clock: SimTime },
    #[error("no link between {from} and {to}")]
    NoLink { from: NodeId, to: NodeId },
    #[error("stopped at {clock} with {pending} events pending")]
    Nonquiescent { clock: SimTime, pending: usize },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{ControlBody, ControlMessage};

    /// Records (time, node, seq) and optionally echoes messages back once.
    #[derive(Default)]
    struct Recorder {
        seen: Vec<(SimTime, NodeId, u64)>,
        echo: bool,
    }

    impl Handler for Recorder {
        fn handle(&mut self, k: &mut Kernel, ev: Event) {
            self.seen.push((ev.time, ev.target, ev.seq));
            if let (true, Payload::Deliver { from, msg, .. }) = (self.echo, ev.payload) {
                self.echo = false;
                k.send(ev.target, from, msg).unwrap();
            }
        }
    }

    fn msg() -> Message {
        Message::Control(ControlMessage {
            corr: 1,
            step: None,
            sender: NodeId(1),
            receiver: NodeId(2),
            body: ControlBody::RrcSetup,
        })
    }

    fn pair(latency: u64) -> Topology {
        let mut t = Topology::default();
        t.add_node(NodeId(1), "a", Role::Ue);
        t.add_node(NodeId(2), "b", Role::Ran);
        t.add_link(NodeId(1), NodeId(2), Link::new(latency));
        t
    }

    #[test]
    fn empty_run() {
        let mut k = Kernel::new(Topology::default(), 1);
        let s = k.run_to_quiescence(&mut Recorder::default(), 1000);
        assert_eq!(s.final_clock, 0);
        assert!(s.counters.is_empty());
        assert!(s.quiescent());
    }

    #[test]
    fn latency_delivery() {
        let mut k = Kernel::new(pair(5), 1);
        k.send(NodeId(1), NodeId(2), msg()).unwrap();
        let mut r = Recorder::default();
        k.run_to_quiescence(&mut r, 1000);
        assert_eq!(r.seen, vec![(5, NodeId(2), 0)]);
    }

    #[test]
    fn send_uses_current_clock() {
        let mut k = Kernel::new(pair(3), 1);
        k.schedule(10, NodeId(1), Payload::Action(Action::Detach)).unwrap();
        let mut r = Recorder::default();
        k.run_to_quiescence(&mut r, 1000);
        k.send(NodeId(1), NodeId(2), msg()).unwrap();
        k.run_to_quiescence(&mut r, 1000);
        assert_eq!(r.seen.last().unwrap().0, 13);
    }

    #[test]
    fn same_time_insertion_order() {
        let mut k = Kernel::new(pair(1), 1);
        for _ in 0..3 {
            k.schedule(4, NodeId(2), Payload::Action(Action::Detach)).unwrap();
        }
        let mut r = Recorder::default();
        k.run_to_quiescence(&mut r, 10);
        let seqs: Vec<u64> = r.seen.iter().map(|s| s.2).collect();
        assert_eq!(seqs, vec![0, 1, 2]);
    }

    #[test]
    fn time_travel_rejected() {
        let mut k = Kernel::new(pair(1), 1);
        k.schedule(5, NodeId(1), Payload::Action(Action::Detach)).unwrap();
        k.run_to_quiescence(&mut Recorder::default(), 10);
        assert_eq!(
            k.schedule(4, NodeId(1), Payload::Action(Action::Detach)),
            Err(EngineError::TimeTravel { at: 4, clock: 5 })
        );
        assert!(k.schedule(5, NodeId(1), Payload::Action(Action::Detach)).is_ok());
    }

    #[test]
    fn full_loss_and_missing_link() {
        let mut t = pair(1);
        t.add_link(
            NodeId(1),
            NodeId(2),
            Link {
                latency_ms: 1,
                loss_rate: 1.0,
                jitter_ms: 0,
            },
        );
        t.add_node(NodeId(3), "c", Role::Ran);
        let mut k = Kernel::new(t, 9);
        for _ in 0..5 {
            k.send(NodeId(1), NodeId(2), msg()).unwrap();
        }
        assert_eq!(k.metrics.total("drops"), 5);
        assert_eq!(k.pending(), 0);
        assert_eq!(
            k.send(NodeId(1), NodeId(3), msg()),
            Err(EngineError::NoLink {
                from: NodeId(1),
                to: NodeId(3)
            })
        );
    }

    #[test]
    fn cutoff_reports_nonquiescent() {
        let mut k = Kernel::new(pair(50), 1);
        k.send(NodeId(1), NodeId(2), msg()).unwrap();
        let s = k.run_to_quiescence(&mut Recorder::default(), 10);
        assert_eq!(s.check(), Err(EngineError::Nonquiescent { clock: 0, pending: 1 }));
        assert_eq!(k.messages_sent(), k.messages_delivered() + k.messages_queued() as u64);
    }

    #[test]
    fn seeded_jitter_is_reproducible() {
        let run = |seed| {
            let mut t = pair(1);
            t.add_link(
                NodeId(1),
                NodeId(2),
                Link {
                    latency_ms: 1,
                    loss_rate: 0.3,
                    jitter_ms: 7,
                },
            );
            let mut k = Kernel::new(t, seed);
            for _ in 0..50 {
                k.send(NodeId(1), NodeId(2), msg()).unwrap();
            }
            let mut r = Recorder {
                echo: true,
                ..Recorder::default()
            };
            k.run_to_quiescence(&mut r, 10_000);
            (r.seen, k.trace_text())
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }
}
