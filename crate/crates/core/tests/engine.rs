use icn5gc::engine::{Event, Handler, Kernel, Link, Message, Payload, Role, Topology};
use icn5gc::name::parse_name;
use icn5gc::packet::NodeId;

/// Records every delivery and echoes nothing.
#[derive(Default)]
struct Recorder {
    seen: Vec<(u64, NodeId, String)>,
}

impl Handler for Recorder {
    fn handle(&mut self, _k: &mut Kernel, event: Event) {
        if let Payload::Deliver { msg: Message::Publication { name, .. }, .. } = event.payload {
            self.seen.push((event.time, event.target, name.to_string()));
        }
    }
}

fn line(latency: u64, jitter: u64) -> Kernel {
    let mut t = Topology::default();
    t.add_node(NodeId(1), "a", Role::AppServer);
    t.add_node(NodeId(2), "b", Role::AppServer);
    t.add_link(
        NodeId(1),
        NodeId(2),
        Link {
            latency_ms: latency,
            loss_rate: 0.0,
            jitter_ms: jitter,
        },
    );
    Kernel::new(t, 9)
}

fn publication(i: u32) -> Message {
    Message::Publication {
        name: parse_name(&format!("/x/{i}")).unwrap(),
        size: i,
    }
}

#[test]
fn jittered_link_keeps_fifo_order() {
    let mut k = line(5, 40);
    for i in 0..200 {
        k.send(NodeId(1), NodeId(2), publication(i)).unwrap();
    }
    let mut r = Recorder::default();
    let s = k.run_to_quiescence(&mut r, 10_000);
    assert!(s.quiescent());
    let order: Vec<String> = r.seen.iter().map(|(_, _, n)| n.clone()).collect();
    let want: Vec<String> = (0..200).map(|i| format!("/x/{i}")).collect();
    assert_eq!(order, want);
    assert!(r.seen.windows(2).all(|w| w[0].0 <= w[1].0));
    assert!(r.seen.iter().all(|(t, _, _)| (5..=45).contains(t)));
}

#[test]
fn same_seed_same_trace() {
    let run = || {
        let mut k = line(3, 20);
        for i in 0..50 {
            k.send(NodeId(1), NodeId(2), publication(i)).unwrap();
        }
        k.run_to_quiescence(&mut Recorder::default(), 10_000);
        k.trace_text()
    };
    assert_eq!(run(), run());
}

#[test]
fn horizon_stops_the_run() {
    let mut k = line(100, 0);
    k.send(NodeId(1), NodeId(2), publication(0)).unwrap();
    let s = k.run_to_quiescence(&mut Recorder::default(), 50);
    assert!(!s.quiescent());
    assert!(s.check().is_err());
    assert!(s.final_clock <= 50);
}
