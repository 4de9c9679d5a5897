//! Scenario files: TOML text, validated into a [`ScenarioConfig`] with every
//! node reference resolved to an id.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use rand::Rng;
use serde::Deserialize;

use crate::control::{PolicyDelta, ProfilePatch, SessionKind, SliceDescriptor, SliceId, SubscriptionProfile};
use crate::engine::{Action, Link, Role, SimTime};
use crate::name::{parse_name, Name};
use crate::nodes::{AppSetup, NodeSetup};
use crate::packet::{Addr, NodeId};

use super::ScenarioError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    IpMec,
    IcnMec,
    Handover,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::IpMec => "ip-mec",
            Mode::IcnMec => "icn-mec",
            Mode::Handover => "handover",
        })
    }
}

pub const DEFAULT_MAX_TIME_MS: SimTime = 600_000;
pub const DEFAULT_CONTROL_LATENCY_MS: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpec {
    pub a: NodeId,
    pub b: NodeId,
    pub link: Link,
    /// Latency fixed by co-location; never randomized.
    pub pinned: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduledAction {
    pub at: SimTime,
    pub node: NodeId,
    pub action: Action,
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub name: String,
    pub mode: Mode,
    pub seed: u64,
    pub max_time_ms: SimTime,
    pub guard_ms: u64,
    pub nodes: Vec<NodeSetup>,
    pub links: Vec<LinkSpec>,
    pub processing: BTreeMap<Role, u64>,
    pub slices: Vec<SliceDescriptor>,
    pub profiles: Vec<SubscriptionProfile>,
    pub actions: Vec<ScheduledAction>,
}

impl ScenarioConfig {
    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().find(|n| n.name == name).map(|n| n.id)
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeSetup> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn with_role(&self, role: Role) -> Vec<NodeId> {
        self.nodes.iter().filter(|n| n.role == role).map(|n| n.id).collect()
    }

    /// Every link that is not pinned gets `ms`.
    pub fn set_uniform_latency(&mut self, ms: u64) {
        for l in self.links.iter_mut().filter(|l| !l.pinned) {
            l.link.latency_ms = ms;
        }
    }

    /// Uniform draw from `lo..=hi` for every link that is not pinned.
    pub fn randomize_latencies<R: Rng>(&mut self, rng: &mut R, lo: u64, hi: u64) {
        for l in self.links.iter_mut().filter(|l| !l.pinned) {
            l.link.latency_ms = rng.gen_range(lo..=hi);
        }
    }

    pub fn link_mut(&mut self, a: NodeId, b: NodeId) -> Option<&mut LinkSpec> {
        self.links
            .iter_mut()
            .find(|l| (l.a, l.b) == (a, b) || (l.a, l.b) == (b, a))
    }
}

// ---- raw file shape ----

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    mode: Mode,
    #[serde(default)]
    seed: u64,
    max_time_ms: Option<i64>,
    guard_ms: Option<i64>,
    control_latency_ms: Option<i64>,
    #[serde(default)]
    processing: BTreeMap<String, i64>,
    #[serde(default)]
    node: Vec<RawNode>,
    #[serde(default)]
    link: Vec<RawLink>,
    #[serde(default)]
    slice: Vec<RawSlice>,
    #[serde(default)]
    subscription: Vec<RawSubscription>,
    #[serde(default)]
    action: Vec<RawAction>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    name: String,
    role: Role,
    ran: Option<String>,
    colocated_with: Option<String>,
    prefix: Option<String>,
    session: Option<SessionKind>,
    slice: Option<String>,
    #[serde(default)]
    cs_capacity: usize,
    addr: Option<Addr>,
    dns: Option<Addr>,
    payload_size: Option<u32>,
    #[serde(default)]
    fail_control: bool,
    #[serde(default)]
    routes: Vec<RawRoute>,
    app: Option<RawApp>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRoute {
    prefix: String,
    via: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawApp {
    kind: String,
    next: Option<String>,
    target: Option<String>,
    #[serde(default)]
    period_ms: i64,
    #[serde(default = "one")]
    count: i64,
    #[serde(default)]
    max_retries: u32,
    #[serde(default = "one")]
    alg_delay_ms: i64,
    #[serde(default)]
    ip_mode: bool,
    dns: Option<Addr>,
    #[serde(default)]
    records: Vec<RawRecord>,
    payload_size: Option<u32>,
}

fn one() -> i64 {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    name: String,
    addr: Addr,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLink {
    a: String,
    b: String,
    latency_ms: i64,
    #[serde(default)]
    loss_rate: f64,
    #[serde(default)]
    jitter_ms: i64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSlice {
    id: String,
    #[serde(default)]
    anchors: Vec<String>,
    #[serde(default)]
    ulcls: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSubscription {
    ue: String,
    #[serde(default)]
    icn_service_enabled: bool,
    #[serde(default)]
    slices: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAction {
    at_ms: i64,
    node: String,
    #[serde(rename = "do")]
    what: String,
    object: Option<String>,
    size: Option<u32>,
    target: Option<String>,
    ue: Option<String>,
    icn_service_enabled: Option<bool>,
    #[serde(default)]
    add_slices: Vec<String>,
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let fallback = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut cfg = parse_scenario(&text)?;
    if cfg.name.is_empty() {
        cfg.name = fallback;
    }
    Ok(cfg)
}

pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map(|s| line_col(text, s.start)).unwrap_or((0, 0));
        ScenarioError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    Builder::default().build(raw)
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map(|i| i + 1).unwrap_or(0) + 1;
    (line, column)
}

fn invalid(location: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation {
        location: location.into(),
        message: message.into(),
    }
}

fn non_negative(v: i64, location: impl Into<String>) -> Result<u64, ScenarioError> {
    u64::try_from(v).map_err(|_| invalid(location, format!("must not be negative (got {v})")))
}

fn name_at(s: &str, location: String) -> Result<Name, ScenarioError> {
    parse_name(s).map_err(|e| invalid(location, e.to_string()))
}

#[derive(Default)]
struct Builder {
    ids: BTreeMap<String, (NodeId, Role)>,
}

impl Builder {
    fn lookup(&self, name: &str, location: String) -> Result<(NodeId, Role), ScenarioError> {
        self.ids
            .get(name)
            .copied()
            .ok_or_else(|| invalid(location, format!("unknown node '{name}'")))
    }

    fn with_role(&self, name: &str, location: String, roles: &[Role]) -> Result<NodeId, ScenarioError> {
        let (id, role) = self.lookup(name, location.clone())?;
        if !roles.contains(&role) {
            let want: Vec<&str> = roles.iter().map(|r| r.as_str()).collect();
            return Err(invalid(location, format!("'{name}' is a {role}, expected {}", want.join(" or "))));
        }
        Ok(id)
    }

    fn build(mut self, raw: RawScenario) -> Result<ScenarioConfig, ScenarioError> {
        for (i, n) in raw.node.iter().enumerate() {
            let id = NodeId(i as u32 + 1);
            if self.ids.insert(n.name.clone(), (id, n.role)).is_some() {
                return Err(invalid(format!("node[{i}].name"), format!("duplicate node '{}'", n.name)));
            }
        }

        let mut nodes = Vec::new();
        for (i, n) in raw.node.iter().enumerate() {
            nodes.push(self.node(i, n)?);
        }

        let mut links: Vec<LinkSpec> = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, l) in raw.link.iter().enumerate() {
            let at = |f: &str| format!("link[{i}].{f}");
            let (a, _) = self.lookup(&l.a, at("a"))?;
            let (b, _) = self.lookup(&l.b, at("b"))?;
            if a == b {
                return Err(invalid(at("b"), "link to itself"));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(invalid(at("b"), format!("duplicate link {}-{}", l.a, l.b)));
            }
            if !(0.0..=1.0).contains(&l.loss_rate) {
                return Err(invalid(at("loss_rate"), "must lie in [0, 1]"));
            }
            links.push(LinkSpec {
                a,
                b,
                link: Link {
                    latency_ms: non_negative(l.latency_ms, at("latency_ms"))?,
                    loss_rate: l.loss_rate,
                    jitter_ms: non_negative(l.jitter_ms, at("jitter_ms"))?,
                },
                pinned: false,
            });
        }

        // co-located RAN and UL-CL share a box: their link costs nothing
        for (i, n) in raw.node.iter().enumerate() {
            let Some(other) = &n.colocated_with else { continue };
            let at = format!("node[{i}].colocated_with");
            if n.role != Role::Ran {
                return Err(invalid(at, "only a ran can be co-located"));
            }
            let ran = NodeId(i as u32 + 1);
            let ulcl = self.with_role(other, at, &[Role::UlCl])?;
            match links.iter_mut().find(|l| (l.a, l.b) == (ran, ulcl) || (l.a, l.b) == (ulcl, ran)) {
                Some(l) => {
                    l.link.latency_ms = 0;
                    l.pinned = true;
                }
                None => {
                    seen.insert((ran.min(ulcl), ran.max(ulcl)));
                    links.push(LinkSpec {
                        a: ran,
                        b: ulcl,
                        link: Link::new(0),
                        pinned: true,
                    });
                }
            }
        }

        // control links nobody wrote down explicitly
        let control_latency = match raw.control_latency_ms {
            Some(v) => non_negative(v, "control_latency_ms")?,
            None => DEFAULT_CONTROL_LATENCY_MS,
        };
        let talks_control = |r: Role| {
            r.is_control() || matches!(r, Role::Ue | Role::Ran | Role::UlCl | Role::IcnAp | Role::Upf | Role::IcnDnRouter)
        };
        for a in &nodes {
            for b in &nodes {
                if a.id >= b.id || !(a.role.is_control() || b.role.is_control()) {
                    continue;
                }
                if !talks_control(a.role) || !talks_control(b.role) {
                    continue;
                }
                if seen.insert((a.id, b.id)) {
                    links.push(LinkSpec {
                        a: a.id,
                        b: b.id,
                        link: Link::new(control_latency),
                        pinned: false,
                    });
                }
            }
        }

        let mut processing = BTreeMap::new();
        for (role, ms) in &raw.processing {
            let at = format!("processing.{role}");
            let r = Role::ALL
                .into_iter()
                .find(|r| r.as_str() == role)
                .ok_or_else(|| invalid(at.clone(), format!("unknown role '{role}'")))?;
            processing.insert(r, non_negative(*ms, at)?);
        }

        let mut slices = Vec::new();
        for (i, s) in raw.slice.iter().enumerate() {
            let anchors = s
                .anchors
                .iter()
                .map(|a| self.with_role(a, format!("slice[{i}].anchors"), &[Role::IcnAp, Role::Upf]))
                .collect::<Result<Vec<_>, _>>()?;
            let ulcls = s
                .ulcls
                .iter()
                .map(|a| self.with_role(a, format!("slice[{i}].ulcls"), &[Role::UlCl]))
                .collect::<Result<Vec<_>, _>>()?;
            slices.push(SliceDescriptor {
                slice_id: SliceId(s.id.clone()),
                icn_ap_candidates: anchors,
                ulcl_candidates: ulcls,
            });
        }
        let known_slices: BTreeSet<&str> = raw.slice.iter().map(|s| s.id.as_str()).collect();
        let check_slice = |s: &str, at: String| {
            if known_slices.contains(s) {
                Ok(SliceId(s.to_string()))
            } else {
                Err(invalid(at, format!("unknown slice '{s}'")))
            }
        };

        let mut profiles = Vec::new();
        for (i, s) in raw.subscription.iter().enumerate() {
            let ue = self.with_role(&s.ue, format!("subscription[{i}].ue"), &[Role::Ue])?;
            let allowed_slices = s
                .slices
                .iter()
                .map(|x| check_slice(x, format!("subscription[{i}].slices")))
                .collect::<Result<_, _>>()?;
            profiles.push(SubscriptionProfile {
                ue_id: ue,
                icn_service_enabled: s.icn_service_enabled,
                allowed_slices,
            });
        }
        for (i, n) in raw.node.iter().enumerate() {
            if let Some(s) = &n.slice {
                check_slice(s, format!("node[{i}].slice"))?;
            }
        }

        let mut actions = Vec::new();
        for (i, a) in raw.action.iter().enumerate() {
            let at = |f: &str| format!("action[{i}].{f}");
            let (node, role) = self.lookup(&a.node, at("node"))?;
            let need = |v: &Option<String>, f: &str| {
                v.clone()
                    .ok_or_else(|| invalid(at(f), format!("required by '{}'", a.what)))
            };
            let expect_role = |roles: &[Role]| {
                if roles.contains(&role) {
                    Ok(())
                } else {
                    Err(invalid(at("node"), format!("'{}' cannot {} (it is a {role})", a.node, a.what)))
                }
            };
            let action = match a.what.as_str() {
                "ue_attach" => {
                    expect_role(&[Role::Ue])?;
                    Action::UeAttach
                }
                "detach" => {
                    expect_role(&[Role::Ue])?;
                    Action::Detach
                }
                "request" => {
                    expect_role(&[Role::Ue])?;
                    Action::Request {
                        object: name_at(&need(&a.object, "object")?, at("object"))?,
                    }
                }
                "trigger_handover" => {
                    expect_role(&[Role::Ue])?;
                    let target = need(&a.target, "target")?;
                    Action::TriggerHandover {
                        target_ran: self.with_role(&target, at("target"), &[Role::Ran])?,
                    }
                }
                "sensor_publish" => {
                    expect_role(&[Role::AppServer])?;
                    Action::SensorPublish {
                        object: name_at(&need(&a.object, "object")?, at("object"))?,
                        size: a.size.unwrap_or(1000),
                    }
                }
                "start_consumer" => {
                    expect_role(&[Role::AppServer])?;
                    Action::StartConsumer
                }
                "push_policy" => {
                    expect_role(&[Role::IcnAf])?;
                    let ue = self.with_role(&need(&a.ue, "ue")?, at("ue"), &[Role::Ue])?;
                    let add_slices = a
                        .add_slices
                        .iter()
                        .map(|s| check_slice(s, at("add_slices")))
                        .collect::<Result<_, _>>()?;
                    Action::PushPolicy {
                        delta: PolicyDelta {
                            patches: vec![ProfilePatch {
                                ue_id: ue,
                                icn_service_enabled: a.icn_service_enabled,
                                add_slices,
                            }],
                        },
                    }
                }
                other => return Err(invalid(at("do"), format!("unknown action '{other}'"))),
            };
            actions.push(ScheduledAction {
                at: non_negative(a.at_ms, at("at_ms"))?,
                node,
                action,
            });
        }

        Ok(ScenarioConfig {
            name: raw.name.unwrap_or_default(),
            mode: raw.mode,
            seed: raw.seed,
            max_time_ms: match raw.max_time_ms {
                Some(v) => non_negative(v, "max_time_ms")?,
                None => DEFAULT_MAX_TIME_MS,
            },
            guard_ms: match raw.guard_ms {
                Some(v) => non_negative(v, "guard_ms")?,
                None => 500,
            },
            nodes,
            links,
            processing,
            slices,
            profiles,
            actions,
        })
    }

    fn node(&self, i: usize, n: &RawNode) -> Result<NodeSetup, ScenarioError> {
        let at = |f: &str| format!("node[{i}].{f}");
        let ran = match &n.ran {
            Some(r) => Some(self.with_role(r, at("ran"), &[Role::Ran])?),
            None if n.role == Role::Ue => return Err(invalid(at("ran"), "a ue needs an attach ran")),
            None => None,
        };
        let prefix = n.prefix.as_deref().map(|p| name_at(p, at("prefix"))).transpose()?;
        let routes = n
            .routes
            .iter()
            .map(|r| {
                let via = self.lookup(&r.via, at("routes"))?.0;
                Ok((name_at(&r.prefix, at("routes"))?, via))
            })
            .collect::<Result<Vec<_>, ScenarioError>>()?;
        let app = match &n.app {
            None => None,
            Some(a) => {
                if n.role != Role::AppServer {
                    return Err(invalid(at("app"), "only an app-server runs an application"));
                }
                Some(self.app(i, a)?)
            }
        };
        if n.role == Role::AppServer && app.is_none() {
            return Err(invalid(at("app"), "an app-server needs an application"));
        }
        Ok(NodeSetup {
            id: NodeId(i as u32 + 1),
            name: n.name.clone(),
            role: n.role,
            cs_capacity: n.cs_capacity,
            fail_control: n.fail_control,
            addr: n.addr,
            dns: n.dns,
            prefix,
            session_kind: n.session.unwrap_or(SessionKind::Icn),
            slice_hint: n.slice.as_deref().map(SliceId::from),
            ran,
            payload_size: n.payload_size.unwrap_or(1000),
            routes,
            app,
        })
    }

    fn app(&self, i: usize, a: &RawApp) -> Result<AppSetup, ScenarioError> {
        use crate::nodes::AppKind;
        let at = |f: &str| format!("node[{i}].app.{f}");
        let kind = match a.kind.as_str() {
            "icn-consumer" => AppKind::IcnConsumer,
            "ip-consumer" => AppKind::IpConsumer,
            "dns" => AppKind::Dns,
            "traffic-monitor" => AppKind::TrafficMonitor,
            "sensor-edge" => AppKind::SensorEdge,
            "relay" => AppKind::Relay,
            other => return Err(invalid(at("kind"), format!("unknown application '{other}'"))),
        };
        let next = a.next.as_deref().map(|n| self.lookup(n, at("next"))).transpose()?.map(|(id, _)| id);
        if matches!(kind, AppKind::IcnConsumer | AppKind::SensorEdge | AppKind::Relay) && next.is_none() {
            return Err(invalid(at("next"), format!("'{}' needs a next hop", a.kind)));
        }
        let target = a.target.as_deref().map(|t| name_at(t, at("target"))).transpose()?;
        if matches!(kind, AppKind::IcnConsumer | AppKind::IpConsumer) && target.is_none() {
            return Err(invalid(at("target"), "a consumer needs a target"));
        }
        if kind == AppKind::IpConsumer && a.dns.is_none() {
            return Err(invalid(at("dns"), "an ip consumer needs a resolver"));
        }
        Ok(AppSetup {
            kind,
            next,
            target,
            period_ms: non_negative(a.period_ms, at("period_ms"))?,
            count: non_negative(a.count, at("count"))?,
            max_retries: a.max_retries,
            alg_delay_ms: non_negative(a.alg_delay_ms, at("alg_delay_ms"))?,
            ip_mode: a.ip_mode,
            dns: a.dns,
            records: a.records.iter().map(|r| (r.name.clone(), r.addr)).collect(),
            payload_size: a.payload_size.unwrap_or(1000),
        })
    }
}
