use std::collections::BTreeMap;

use crate::engine::{Action, Kernel, Message, Payload, SimTime, Timer};
use crate::name::Name;
use crate::packet::{Addr, Data, IcnPdu, Interest, IpBody, IpPacket, NodeId, DEFAULT_INTEREST_LIFETIME_MS};

use super::{ip_packet, route_ip, unexpected, NodeSetup};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum AppKind {
    /// Periodic named requests toward `target`.
    #[default]
    IcnConsumer,
    /// Periodic requests to the address `target` resolves to.
    IpConsumer,
    /// Local resolver.
    Dns,
    /// Traffic monitor at the edge: origin of processed traffic content.
    TrafficMonitor,
    /// Sensor edge: entry point of scripted sensor publications.
    SensorEdge,
    /// Pipeline stage that hands publications to `next`.
    Relay,
}

#[derive(Debug, Clone, Default)]
pub struct AppSetup {
    pub kind: AppKind,
    /// First hop for everything this application emits.
    pub next: Option<NodeId>,
    pub target: Option<Name>,
    pub period_ms: u64,
    pub count: u64,
    pub max_retries: u32,
    /// IP-mode translation delay at the sensor edge.
    pub alg_delay_ms: u64,
    pub ip_mode: bool,
    pub dns: Option<Addr>,
    /// Static resolver records.
    pub records: Vec<(String, Addr)>,
    pub payload_size: u32,
}

#[derive(Debug, Clone)]
struct Outstanding {
    started: SimTime,
    attempt: u32,
}

#[derive(Debug, Clone)]
pub struct AppNode {
    setup: AppSetup,
    addr: Option<Addr>,
    sent: u64,
    nonce: u64,
    pending: BTreeMap<Name, Outstanding>,
    ip_pending: BTreeMap<u64, (Name, Outstanding)>,
    peer: Option<Addr>,
    records: BTreeMap<String, Addr>,
    published: BTreeMap<Name, u32>,
    held_interests: BTreeMap<Name, Vec<(NodeId, Interest)>>,
    held_requests: BTreeMap<Name, Vec<IpPacket>>,
}

impl AppNode {
    pub fn new(setup: &NodeSetup) -> Self {
        let app = setup.app.clone().unwrap_or_default();
        let records = app.records.iter().cloned().collect();
        Self {
            nonce: (setup.id.0 as u64) << 40,
            setup: app,
            addr: setup.addr,
            sent: 0,
            pending: BTreeMap::new(),
            ip_pending: BTreeMap::new(),
            peer: None,
            records,
            published: BTreeMap::new(),
            held_interests: BTreeMap::new(),
            held_requests: BTreeMap::new(),
        }
    }

    pub fn kind(&self) -> AppKind {
        self.setup.kind
    }

    pub fn outstanding(&self) -> usize {
        self.pending.len() + self.ip_pending.len()
    }

    pub fn handle(&mut self, k: &mut Kernel, me: NodeId, payload: Payload) {
        match payload {
            Payload::Action(Action::StartConsumer) => self.start(k, me),
            Payload::Action(Action::SensorPublish { object, size }) => self.sensed(k, me, object, size),
            Payload::Timer(Timer::ConsumerTick) => self.tick(k, me),
            Payload::Timer(Timer::InterestTimeout { name, attempt }) => self.interest_timeout(k, me, name, attempt),
            Payload::Timer(Timer::RequestTimeout { id, attempt }) => self.request_timeout(k, me, id, attempt),
            Payload::Timer(Timer::AlgRelay { name, size }) => self.push_ip(k, me, name, size),
            Payload::Deliver { from, msg, .. } => match msg {
                Message::Icn(pdu) => self.icn(k, me, from, pdu),
                Message::Ip(pkt) => self.ip(k, me, pkt),
                Message::Publication { name, size } => self.publication(k, me, name, size),
                other => unexpected(k, me, &other.describe()),
            },
            other => unexpected(k, me, other.kind()),
        }
    }

    fn start(&mut self, k: &mut Kernel, me: NodeId) {
        match self.setup.kind {
            AppKind::IcnConsumer => k.set_timer(me, 0, Timer::ConsumerTick),
            AppKind::IpConsumer => {
                let name = self.setup.target.as_ref().map(|t| t.to_string()).unwrap_or_default();
                self.resolve(k, me, name);
            }
            _ => unexpected(k, me, "start on a non-consumer"),
        }
    }

    fn resolve(&mut self, k: &mut Kernel, me: NodeId, name: String) {
        match (self.addr, self.setup.dns) {
            (Some(src), Some(dns)) => route_ip(k, me, ip_packet(src, dns, IpBody::DnsQuery { name })),
            _ => unexpected(k, me, "no resolver"),
        }
    }

    fn tick(&mut self, k: &mut Kernel, me: NodeId) {
        if self.sent >= self.setup.count {
            return;
        }
        let Some(target) = self.setup.target.clone() else { return };
        let Ok(name) = target.child(self.sent.to_string()) else { return };
        self.sent += 1;
        match self.setup.kind {
            AppKind::IcnConsumer => self.send_interest(k, me, name, 0),
            AppKind::IpConsumer => {
                let id = self.sent;
                self.ip_pending.insert(
                    id,
                    (
                        name.clone(),
                        Outstanding {
                            started: k.now(),
                            attempt: 0,
                        },
                    ),
                );
                self.send_request(k, me, id, &name, 0);
            }
            _ => return,
        }
        if self.sent < self.setup.count {
            k.set_timer(me, self.setup.period_ms.max(1), Timer::ConsumerTick);
        }
    }

    fn send_interest(&mut self, k: &mut Kernel, me: NodeId, name: Name, attempt: u32) {
        let Some(next) = self.setup.next else {
            return unexpected(k, me, "consumer without gateway");
        };
        self.nonce += 1;
        let started = self.pending.get(&name).map(|o| o.started).unwrap_or(k.now());
        self.pending.insert(name.clone(), Outstanding { started, attempt });
        let interest = Interest::new(name.clone(), self.nonce);
        k.set_timer(me, interest.lifetime_ms, Timer::InterestTimeout { name, attempt });
        let _ = k.send(me, next, Message::Icn(IcnPdu::Interest(interest)));
    }

    fn send_request(&mut self, k: &mut Kernel, me: NodeId, id: u64, name: &Name, attempt: u32) {
        k.set_timer(me, DEFAULT_INTEREST_LIFETIME_MS, Timer::RequestTimeout { id, attempt });
        match (self.addr, self.peer) {
            (Some(src), Some(dst)) => {
                let body = IpBody::Request {
                    object: name.to_string(),
                    id,
                };
                route_ip(k, me, ip_packet(src, dst, body));
            }
            _ => k.inc_cause("drops", me, "unresolved"),
        }
    }

    fn interest_timeout(&mut self, k: &mut Kernel, me: NodeId, name: Name, attempt: u32) {
        if self.pending.get(&name).is_none_or(|o| o.attempt != attempt) {
            return;
        }
        k.inc("interests_lost", me, 1);
        self.retry_interest(k, me, name, attempt);
    }

    fn retry_interest(&mut self, k: &mut Kernel, me: NodeId, name: Name, attempt: u32) {
        if attempt < self.setup.max_retries {
            k.inc("retransmissions", me, 1);
            self.send_interest(k, me, name, attempt + 1);
        } else {
            self.pending.remove(&name);
            k.trace_line(me, &format!("app gave up {name}"));
        }
    }

    fn request_timeout(&mut self, k: &mut Kernel, me: NodeId, id: u64, attempt: u32) {
        let Some((name, o)) = self.ip_pending.get_mut(&id) else { return };
        if o.attempt != attempt {
            return;
        }
        k.inc("requests_lost", me, 1);
        if attempt < self.setup.max_retries {
            o.attempt += 1;
            let name = name.clone();
            k.inc("retransmissions", me, 1);
            self.send_request(k, me, id, &name, attempt + 1);
        } else {
            self.ip_pending.remove(&id);
        }
    }

    fn icn(&mut self, k: &mut Kernel, me: NodeId, from: NodeId, pdu: IcnPdu) {
        match pdu {
            IcnPdu::Data(d) => match self.pending.remove(&d.name) {
                Some(o) => {
                    k.inc("requests_served", me, 1);
                    k.record(me, "latency", d.name.to_string(), k.now() - o.started);
                }
                None => k.inc("duplicate_deliveries", me, 1),
            },
            IcnPdu::Nack(n) => {
                let Some(o) = self.pending.get(&n.name) else { return };
                let attempt = o.attempt;
                k.inc("interests_lost", me, 1);
                k.trace_line(me, &format!("app nack {} {:?}", n.name, n.reason));
                self.retry_interest(k, me, n.name, attempt);
            }
            IcnPdu::Interest(i) => {
                if self.setup.kind != AppKind::TrafficMonitor {
                    return unexpected(k, me, "interest at a consumer");
                }
                k.inc("upstream_fetches", me, 1);
                match self.published.get(&i.name) {
                    Some(size) => {
                        let data = Data {
                            name: i.name,
                            payload_size: *size,
                            producer_id: me,
                            signed: true,
                        };
                        let _ = k.send(me, from, Message::Icn(IcnPdu::Data(data)));
                    }
                    None => self.held_interests.entry(i.name.clone()).or_default().push((from, i)),
                }
            }
        }
    }

    fn ip(&mut self, k: &mut Kernel, me: NodeId, pkt: IpPacket) {
        match pkt.body.clone() {
            IpBody::DnsQuery { name } => {
                k.inc("dns_lookups", me, 1);
                let addr = self.records.get(&name).copied();
                let answer = ip_packet(pkt.tuple.dst_addr, pkt.tuple.src_addr, IpBody::DnsAnswer { name, addr });
                route_ip(k, me, answer);
            }
            IpBody::DnsRegister { name, addr } => {
                self.records.insert(name, addr);
            }
            IpBody::DnsAnswer { addr, .. } => {
                self.peer = addr;
                if addr.is_some() && self.sent == 0 {
                    k.set_timer(me, 0, Timer::ConsumerTick);
                }
            }
            IpBody::SessionRestart { addr, .. } => {
                k.inc("session_reestablishments", me, 1);
                self.peer = Some(addr);
            }
            IpBody::Response { id, .. } => match self.ip_pending.remove(&id) {
                Some((name, o)) => {
                    k.inc("requests_served", me, 1);
                    k.record(me, "latency", name.to_string(), k.now() - o.started);
                }
                None => k.inc("duplicate_deliveries", me, 1),
            },
            IpBody::Request { object, .. } => {
                if self.setup.kind != AppKind::TrafficMonitor {
                    return unexpected(k, me, "request at a non-server");
                }
                k.inc("upstream_fetches", me, 1);
                let Ok(name) = crate::name::parse_name(&object) else {
                    return unexpected(k, me, "bad object name");
                };
                if self.published.contains_key(&name) {
                    self.respond(k, me, pkt);
                } else {
                    self.held_requests.entry(name).or_default().push(pkt);
                }
            }
            IpBody::Push { object } => match crate::name::parse_name(&object) {
                Ok(name) => {
                    let size = pkt.payload_size;
                    self.publication(k, me, name, size);
                }
                Err(_) => unexpected(k, me, "bad object name"),
            },
        }
    }

    fn respond(&mut self, k: &mut Kernel, me: NodeId, req: IpPacket) {
        let IpBody::Request { object, id } = req.body else { return };
        let reply = ip_packet(req.tuple.dst_addr, req.tuple.src_addr, IpBody::Response { object, id });
        route_ip(k, me, reply);
    }

    fn sensed(&mut self, k: &mut Kernel, me: NodeId, object: Name, size: u32) {
        if self.setup.ip_mode {
            k.set_timer(me, self.setup.alg_delay_ms, Timer::AlgRelay { name: object, size });
        } else {
            self.publication(k, me, object, size);
        }
    }

    fn push_ip(&mut self, k: &mut Kernel, me: NodeId, name: Name, size: u32) {
        let Some(next) = self.setup.next else { return };
        let src = self.addr.unwrap_or(Addr(0));
        let mut pkt = ip_packet(src, src, IpBody::Push { object: name.to_string() });
        pkt.payload_size = size;
        let _ = k.send(me, next, Message::Ip(pkt));
    }

    /// Pipeline hop, or the end of the pipeline at the traffic monitor.
    fn publication(&mut self, k: &mut Kernel, me: NodeId, name: Name, size: u32) {
        if self.setup.kind != AppKind::TrafficMonitor {
            let Some(next) = self.setup.next else {
                return unexpected(k, me, "publication without next stage");
            };
            if self.setup.ip_mode {
                return self.push_ip(k, me, name, size);
            }
            let _ = k.send(me, next, Message::Publication { name, size });
            return;
        }
        k.trace_line(me, &format!("app published {name}"));
        self.published.insert(name.clone(), size);
        for (from, i) in self.held_interests.remove(&name).unwrap_or_default() {
            let data = Data {
                name: i.name,
                payload_size: size,
                producer_id: me,
                signed: true,
            };
            let _ = k.send(me, from, Message::Icn(IcnPdu::Data(data)));
        }
        for req in self.held_requests.remove(&name).unwrap_or_default() {
            self.respond(k, me, req);
        }
    }
}
