//! Packet model: ICN and IP PDUs, five tuples and tunnel encapsulation.

use std::collections::BTreeMap;
use std::fmt;
use std::net::Ipv4Addr;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::name::Name;

/// Default Interest lifetime in milliseconds.
pub const DEFAULT_INTEREST_LIFETIME_MS: u64 = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TunnelId(pub u32);

impl fmt::Display for TunnelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SessionId(pub u32);

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.0)
    }
}

/// Abstract IPv4-style address; printed dotted-quad.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Addr(pub u32);

impl fmt::Display for Addr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Ipv4Addr::from(self.0).fmt(f)
    }
}

impl FromStr for Addr {
    type Err = std::net::AddrParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(Addr(u32::from(s.parse::<Ipv4Addr>()?)))
    }
}

impl Serialize for Addr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Addr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    Udp,
    Tcp,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FiveTuple {
    pub src_addr: Addr,
    pub dst_addr: Addr,
    pub src_port: u16,
    pub dst_port: u16,
    pub protocol: Protocol,
}

impl FiveTuple {
    pub fn reversed(&self) -> FiveTuple {
        FiveTuple {
            src_addr: self.dst_addr,
            dst_addr: self.src_addr,
            src_port: self.dst_port,
            dst_port: self.src_port,
            protocol: self.protocol,
        }
    }
}

impl fmt::Display for FiveTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}->{}:{}/{:?}",
            self.src_addr, self.src_port, self.dst_addr, self.dst_port, self.protocol
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interest {
    pub name: Name,
    pub nonce: u64,
    pub lifetime_ms: u64,
    pub hop_count: u32,
}

impl Interest {
    pub fn new(name: Name, nonce: u64) -> Self {
        Self {
            name,
            nonce,
            lifetime_ms: DEFAULT_INTEREST_LIFETIME_MS,
            hop_count: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Data {
    pub name: Name,
    pub payload_size: u32,
    pub producer_id: NodeId,
    /// Stands in for a content signature.
    pub signed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NackReason {
    NoRoute,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Nack {
    pub name: Name,
    pub nonce: u64,
    pub reason: NackReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum IcnPdu {
    Interest(Interest),
    Data(Data),
    Nack(Nack),
}

impl IcnPdu {
    pub fn name(&self) -> &Name {
        match self {
            IcnPdu::Interest(i) => &i.name,
            IcnPdu::Data(d) => &d.name,
            IcnPdu::Nack(n) => &n.name,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            IcnPdu::Interest(_) => "Interest",
            IcnPdu::Data(_) => "Data",
            IcnPdu::Nack(_) => "Nack",
        }
    }
}

/// Application content carried by IP packets in the IP-mode scenarios.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum IpBody {
    DnsQuery { name: String },
    DnsAnswer { name: String, addr: Option<Addr> },
    DnsRegister { name: String, addr: Addr },
    Request { object: String, id: u64 },
    Response { object: String, id: u64 },
    Push { object: String },
    SessionRestart { name: String, addr: Addr },
}

impl IpBody {
    pub fn kind(&self) -> &'static str {
        match self {
            IpBody::DnsQuery { .. } => "DnsQuery",
            IpBody::DnsAnswer { .. } => "DnsAnswer",
            IpBody::DnsRegister { .. } => "DnsRegister",
            IpBody::Request { .. } => "Request",
            IpBody::Response { .. } => "Response",
            IpBody::Push { .. } => "Push",
            IpBody::SessionRestart { .. } => "SessionRestart",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IpPacket {
    pub tuple: FiveTuple,
    pub payload_size: u32,
    pub body: IpBody,
}

/// A PDU that can ride a user-plane tunnel.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Inner {
    Icn(IcnPdu),
    Ip(IpPacket),
}

impl Inner {
    pub fn kind(&self) -> &'static str {
        match self {
            Inner::Icn(p) => p.kind(),
            Inner::Ip(p) => p.body.kind(),
        }
    }

    pub fn is_icn(&self) -> bool {
        matches!(self, Inner::Icn(_))
    }

    /// Name for ICN PDUs, five tuple for IP packets.
    pub fn label(&self) -> String {
        match self {
            Inner::Icn(p) => p.name().to_string(),
            Inner::Ip(p) => p.tuple.to_string(),
        }
    }
}

/// Outer header plus payload. For ICN PDUs the header is the session's IP
/// association; for IP packets it is the packet's own five tuple.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TunneledPacket {
    pub tunnel_id: TunnelId,
    pub header: FiveTuple,
    pub inner: Inner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Uplink,
    Downlink,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Uplink => "UL",
            Direction::Downlink => "DL",
        })
    }
}

/// Which side of a user-plane function a tunnel faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TunnelSide {
    /// Toward the RAN.
    Access,
    /// Toward the anchor.
    Core,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TunnelInfo {
    pub peer: NodeId,
    pub side: TunnelSide,
    /// Uplink IP association of the session riding this tunnel.
    pub association: FiveTuple,
    pub session: Option<SessionId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PacketError {
    #[error("unknown tunnel {0}")]
    UnknownTunnel(TunnelId),
}

/// Tunnels known at one node.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TunnelTable {
    tunnels: BTreeMap<TunnelId, TunnelInfo>,
}

impl TunnelTable {
    pub fn insert(&mut self, id: TunnelId, info: TunnelInfo) {
        self.tunnels.insert(id, info);
    }

    pub fn remove(&mut self, id: TunnelId) -> Option<TunnelInfo> {
        self.tunnels.remove(&id)
    }

    pub fn get(&self, id: TunnelId) -> Option<&TunnelInfo> {
        self.tunnels.get(&id)
    }

    pub fn contains(&self, id: TunnelId) -> bool {
        self.tunnels.contains_key(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (TunnelId, &TunnelInfo)> {
        self.tunnels.iter().map(|(k, v)| (*k, v))
    }

    pub fn len(&self) -> usize {
        self.tunnels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tunnels.is_empty()
    }

    /// Wraps `inner` for transmission on `tunnel`. ICN PDUs get the
    /// session's association as outer header (reversed for downlink).
    pub fn encapsulate(
        &self,
        inner: Inner,
        tunnel: TunnelId,
        direction: Direction,
    ) -> Result<TunneledPacket, PacketError> {
        let info = self.get(tunnel).ok_or(PacketError::UnknownTunnel(tunnel))?;
        let header = match &inner {
            Inner::Ip(ip) => ip.tuple,
            Inner::Icn(_) => match direction {
                Direction::Uplink => info.association,
                Direction::Downlink => info.association.reversed(),
            },
        };
        Ok(TunneledPacket {
            tunnel_id: tunnel,
            header,
            inner,
        })
    }
}

pub fn decapsulate(tp: TunneledPacket) -> (TunnelId, Inner) {
    (tp.tunnel_id, tp.inner)
}
