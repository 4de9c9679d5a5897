//! Multi-step request sequences keyed by correlation id. Each step waits
//! for its response before the next is sent; on a failure the completed
//! steps are undone newest first.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::control::{ControlBody, ControlMessage};
use crate::engine::Kernel;
use crate::packet::NodeId;

use super::request;

#[derive(Debug, Clone)]
pub struct Step {
    pub to: NodeId,
    pub step: Option<u8>,
    pub body: ControlBody,
    /// Compensating request if a later step fails.
    pub undo: Option<(NodeId, ControlBody)>,
}

impl Step {
    pub fn new(to: NodeId, step: Option<u8>, body: ControlBody) -> Self {
        Self {
            to,
            step,
            body,
            undo: None,
        }
    }

    pub fn undo(mut self, to: NodeId, body: ControlBody) -> Self {
        self.undo = Some((to, body));
        self
    }
}

#[derive(Debug, Clone)]
struct Running<C> {
    ctx: C,
    queue: VecDeque<Step>,
    done: Vec<(NodeId, ControlBody, Option<u8>)>,
    /// Undo for the step in flight; committed once it succeeds.
    in_flight: Option<(NodeId, ControlBody, Option<u8>)>,
}

pub enum Progress<C> {
    /// Still waiting on a response.
    Pending,
    Finished(C),
    Failed(C, String),
    /// Response to nothing we know (e.g. a compensating request).
    Unknown,
}

#[derive(Debug, Clone)]
pub struct Sequencer<C> {
    running: BTreeMap<u64, Running<C>>,
    ignored: BTreeSet<u64>,
}

impl<C> Default for Sequencer<C> {
    fn default() -> Self {
        Self {
            running: BTreeMap::new(),
            ignored: BTreeSet::new(),
        }
    }
}

impl<C> Sequencer<C> {
    /// Starts a sequence; an empty one finishes immediately.
    pub fn start(&mut self, k: &mut Kernel, me: NodeId, ctx: C, steps: Vec<Step>) -> Progress<C> {
        let run = Running {
            ctx,
            queue: steps.into(),
            done: Vec::new(),
            in_flight: None,
        };
        self.advance(k, me, run)
    }

    fn advance(&mut self, k: &mut Kernel, me: NodeId, mut run: Running<C>) -> Progress<C> {
        if let Some(undo) = run.in_flight.take() {
            run.done.push(undo);
        }
        let Some(next) = run.queue.pop_front() else {
            return Progress::Finished(run.ctx);
        };
        match request(k, me, next.to, next.step, next.body.clone()) {
            Some(corr) => {
                run.in_flight = next.undo.map(|(to, body)| (to, body, next.step));
                self.running.insert(corr, run);
                Progress::Pending
            }
            None => {
                let reason = format!("{} unreachable", k.name(next.to));
                self.rollback(k, me, &run);
                Progress::Failed(run.ctx, reason)
            }
        }
    }

    pub fn on_response(&mut self, k: &mut Kernel, me: NodeId, msg: &ControlMessage) -> Progress<C> {
        if self.ignored.remove(&msg.corr) {
            return Progress::Pending;
        }
        let Some(run) = self.running.remove(&msg.corr) else {
            return Progress::Unknown;
        };
        if msg.body.is_failure() {
            // updates are atomic, so the failed step itself left nothing behind
            let reason = failure_reason(&msg.body, k.name(msg.sender));
            self.rollback(k, me, &run);
            return Progress::Failed(run.ctx, reason);
        }
        self.advance(k, me, run)
    }

    fn rollback(&mut self, k: &mut Kernel, me: NodeId, run: &Running<C>) {
        for (to, body, step) in run.done.iter().rev() {
            if let Some(corr) = request(k, me, *to, *step, body.clone()) {
                self.ignored.insert(corr);
            }
        }
    }
}

fn failure_reason(body: &ControlBody, from: &str) -> String {
    match body {
        ControlBody::N4Nack { reason } | ControlBody::IcnSessionNack { reason } => format!("{from}: {reason}"),
        ControlBody::IcnSmResponse { error: Some(e) } => e.clone(),
        ControlBody::SmContextUpdateAck { result: Err(e) } => e.clone(),
        other => format!("{from}: {}", other.tag()),
    }
}
