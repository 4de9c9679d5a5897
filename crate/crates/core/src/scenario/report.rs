use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::engine::{Kernel, RunSummary, SimTime};

use super::{Mode, ScenarioConfig, ScenarioError};

/// Counters every report carries, in display order.
pub const REPORT_COUNTERS: [&str; 14] = [
    "upstream_fetches",
    "cache_hits",
    "signaling_messages",
    "interests_lost",
    "dns_lookups",
    "session_reestablishments",
    "requests_served",
    "duplicate_deliveries",
    "requests_lost",
    "retransmissions",
    "handovers_completed",
    "handover_aborts",
    "session_refusals",
    "drops",
];

/// Control traffic tagged with one handover step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepTiming {
    pub step: u8,
    pub messages: u64,
    pub first_sent: SimTime,
    pub last_delivered: SimTime,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub name: String,
    pub mode: Mode,
    pub seed: u64,
    pub final_clock: SimTime,
    pub quiescent: bool,
    pub events: u64,
    pub counters: BTreeMap<&'static str, u64>,
    /// Per-request latency in completion order.
    pub latencies: Vec<u64>,
    pub steps: Vec<StepTiming>,
    /// Trigger to completion (or abort) of the first handover.
    pub handover_duration: Option<u64>,
    pub abort_reasons: Vec<String>,
}

impl Report {
    pub fn collect(cfg: &ScenarioConfig, k: &Kernel, summary: &RunSummary) -> Report {
        let counters = REPORT_COUNTERS
            .into_iter()
            .map(|c| (c, k.metrics.total(c)))
            .collect();
        let latencies = k.samples().iter().filter(|s| s.kind == "latency").map(|s| s.value).collect();

        let mut steps: BTreeMap<u8, StepTiming> = BTreeMap::new();
        for r in k.control_log() {
            let Some(step) = r.step else { continue };
            let t = steps.entry(step).or_insert(StepTiming {
                step,
                messages: 0,
                first_sent: r.sent,
                last_delivered: r.delivered,
            });
            t.messages += 1;
            t.first_sent = t.first_sent.min(r.sent);
            t.last_delivered = t.last_delivered.max(r.delivered);
        }

        let first = |kind: &str| k.samples().iter().find(|s| s.kind == kind).map(|s| s.time);
        let start = first("handover_start");
        let end = first("handover_complete").or(first("handover_abort"));
        let handover_duration = start.zip(end).map(|(s, e)| e.saturating_sub(s));
        let abort_reasons = k
            .samples()
            .iter()
            .filter(|s| s.kind == "handover_abort")
            .map(|s| s.label.clone())
            .collect();

        Report {
            name: cfg.name.clone(),
            mode: cfg.mode,
            seed: cfg.seed,
            final_clock: summary.final_clock,
            quiescent: summary.quiescent(),
            events: summary.events,
            counters,
            latencies,
            steps: steps.into_values().collect(),
            handover_duration,
            abort_reasons,
        }
    }

    pub fn get(&self, counter: &str) -> u64 {
        self.counters.get(counter).copied().unwrap_or(0)
    }

    pub fn step(&self, step: u8) -> Option<&StepTiming> {
        self.steps.iter().find(|s| s.step == step)
    }

    /// Identities every run must satisfy; returns the ones that fail.
    pub fn inconsistencies(&self) -> Vec<String> {
        let mut out = Vec::new();
        let served = self.get("requests_served");
        if self.latencies.len() as u64 != served {
            out.push(format!("{} latencies for {served} served requests", self.latencies.len()));
        }
        match self.mode {
            Mode::IcnMec => {
                let edge = self.get("cache_hits") + self.get("upstream_fetches");
                if edge != served {
                    out.push(format!("cache_hits + upstream_fetches = {edge}, served = {served}"));
                }
            }
            Mode::IpMec => {
                if self.get("cache_hits") != 0 {
                    out.push("cache hits without a content store".into());
                }
            }
            Mode::Handover => {}
        }
        out
    }

    /// Machine-readable form: one `key value...` record per line.
    pub fn records(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario {}", self.name);
        let _ = writeln!(s, "mode {}", self.mode);
        let _ = writeln!(s, "seed {}", self.seed);
        let _ = writeln!(s, "final_clock {}", self.final_clock);
        let _ = writeln!(s, "quiescent {}", self.quiescent);
        for (name, v) in &self.counters {
            let _ = writeln!(s, "counter {name} {v}");
        }
        for (i, l) in self.latencies.iter().enumerate() {
            let _ = writeln!(s, "latency {i} {l}");
        }
        for t in &self.steps {
            let _ = writeln!(s, "step {} {} {} {}", t.step, t.messages, t.first_sent, t.last_delivered);
        }
        if let Some(d) = self.handover_duration {
            let _ = writeln!(s, "handover_duration {d}");
        }
        for r in &self.abort_reasons {
            let _ = writeln!(s, "abort {r}");
        }
        s
    }

    fn rows(&self) -> Vec<(String, String)> {
        let mut rows = vec![
            ("mode".to_string(), self.mode.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("final clock (ms)".into(), self.final_clock.to_string()),
            ("quiescent".into(), self.quiescent.to_string()),
        ];
        for (name, v) in &self.counters {
            rows.push((name.to_string(), v.to_string()));
        }
        let (mean, max) = latency_stats(&self.latencies);
        rows.push(("mean latency (ms)".into(), mean));
        rows.push(("max latency (ms)".into(), max));
        rows.push((
            "handover duration (ms)".into(),
            self.handover_duration.map(|d| d.to_string()).unwrap_or("-".into()),
        ));
        for t in &self.steps {
            rows.push((
                format!("step {:>2}", t.step),
                format!("{}..{} ({} msgs)", t.first_sent, t.last_delivered, t.messages),
            ));
        }
        rows
    }
}

fn latency_stats(l: &[u64]) -> (String, String) {
    if l.is_empty() {
        return ("-".into(), "-".into());
    }
    let mean = l.iter().sum::<u64>() as f64 / l.len() as f64;
    (format!("{mean:.1}"), l.iter().max().expect("non-empty").to_string())
}

pub fn render_table(r: &Report) -> String {
    let rows = r.rows();
    let w = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0).max(6);
    let mut s = String::new();
    let _ = writeln!(s, "{:<w$}  {}", "metric", r.name);
    let _ = writeln!(s, "{}", "-".repeat(w + 2 + r.name.len().max(8)));
    for (k, v) in rows {
        let _ = writeln!(s, "{k:<w$}  {v}");
    }
    s
}

/// Side-by-side table; the delta column is `b - a` for numeric rows.
pub fn render_comparison(a: &Report, b: &Report) -> String {
    let ra: BTreeMap<String, String> = a.rows().into_iter().collect();
    let order: Vec<String> = b.rows().into_iter().map(|(k, _)| k).collect();
    let rb: BTreeMap<String, String> = b.rows().into_iter().collect();
    let mut keys: Vec<String> = a.rows().into_iter().map(|(k, _)| k).collect();
    for k in order {
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    let w = keys.iter().map(|k| k.len()).max().unwrap_or(0).max(6);
    let ca = a.name.len().max(12);
    let cb = b.name.len().max(12);
    let mut s = String::new();
    let _ = writeln!(s, "{:<w$}  {:>ca$}  {:>cb$}  {:>8}", "metric", a.name, b.name, "delta");
    let _ = writeln!(s, "{}", "-".repeat(w + ca + cb + 14));
    for k in keys {
        let va = ra.get(&k).map(String::as_str).unwrap_or("-");
        let vb = rb.get(&k).map(String::as_str).unwrap_or("-");
        let delta = match (va.parse::<f64>(), vb.parse::<f64>()) {
            (Ok(x), Ok(y)) if va.parse::<i64>().is_ok() && vb.parse::<i64>().is_ok() => format!("{:+}", y as i64 - x as i64),
            (Ok(x), Ok(y)) => format!("{:+.1}", y - x),
            _ => String::new(),
        };
        let _ = writeln!(s, "{k:<w$}  {va:>ca$}  {vb:>cb$}  {delta:>8}");
    }
    s
}

fn write_file(path: &Path, text: &str) -> Result<(), ScenarioError> {
    std::fs::write(path, text).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Table to `out`, records to `records` when given.
pub fn emit_report(r: &Report, out: &mut impl Write, records: Option<&Path>) -> Result<(), ScenarioError> {
    if let Some(path) = records {
        write_file(path, &r.records())?;
    }
    out.write_all(render_table(r).as_bytes()).map_err(|source| ScenarioError::Io {
        path: "<stdout>".into(),
        source,
    })
}

pub fn emit_comparison(a: &Report, b: &Report, out: &mut impl Write, records: Option<&Path>) -> Result<(), ScenarioError> {
    if let Some(path) = records {
        write_file(path, &format!("{}{}", a.records(), b.records()))?;
    }
    out.write_all(render_comparison(a, b).as_bytes()).map_err(|source| ScenarioError::Io {
        path: "<stdout>".into(),
        source,
    })
}
