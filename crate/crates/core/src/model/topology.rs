//! Network graph: hosts, bridges and the rated links joining them.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::time::TimeNs;

/// Node identifier. Hosts and bridges share one namespace.
pub type NodeId = String;

/// An undirected link between two nodes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub endpoint_a: NodeId,
    pub endpoint_b: NodeId,
    /// Transmission rate in bits per second.
    pub rate: u64,
    /// One-way propagation delay. Zero by default: the emulated channel
    /// carries no distance.
    #[serde(default)]
    pub propagation_delay: TimeNs,
}

impl LinkSpec {
    pub fn new(a: impl Into<NodeId>, b: impl Into<NodeId>, rate: u64) -> Self {
        LinkSpec {
            endpoint_a: a.into(),
            endpoint_b: b.into(),
            rate,
            propagation_delay: TimeNs::ZERO,
        }
    }

    pub fn joins(&self, x: &str, y: &str) -> bool {
        (self.endpoint_a == x && self.endpoint_b == y)
            || (self.endpoint_a == y && self.endpoint_b == x)
    }
}

/// An egress port: the interface on `node` whose link leads to `next`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PortId {
    pub node: NodeId,
    pub next: NodeId,
}

impl PortId {
    pub fn new(node: impl Into<NodeId>, next: impl Into<NodeId>) -> Self {
        PortId {
            node: node.into(),
            next: next.into(),
        }
    }

    /// Filesystem-safe rendering (`B1-B2`), used for per-port output files.
    pub fn file_stem(&self) -> String {
        format!("{}-{}", self.node, self.next)
    }
}

impl fmt::Display for PortId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.node, self.next)
    }
}

impl Serialize for PortId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PortId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let (node, next) = s
            .split_once("->")
            .ok_or_else(|| serde::de::Error::custom(format!("invalid port id {s:?}")))?;
        if node.is_empty() || next.is_empty() {
            return Err(serde::de::Error::custom(format!("invalid port id {s:?}")));
        }
        Ok(PortId::new(node, next))
    }
}

/// The emulated network graph.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub hosts: BTreeSet<NodeId>,
    pub bridges: BTreeSet<NodeId>,
    pub links: Vec<LinkSpec>,
}

/// A single topology rule violation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TopologyViolation {
    NoNodes,
    DuplicateNode(NodeId),
    DanglingLink { link: usize, node: NodeId },
    SelfLoop(NodeId),
    DuplicateLink(NodeId, NodeId),
    BadRate(usize),
    NegativePropagation(usize),
    Disconnected(NodeId),
}

impl fmt::Display for TopologyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologyViolation::NoNodes => write!(f, "no nodes"),
            TopologyViolation::DuplicateNode(n) => {
                write!(f, "node id {n:?} declared more than once")
            }
            TopologyViolation::DanglingLink { link, node } => {
                write!(f, "link #{link} references unknown node {node:?}")
            }
            TopologyViolation::SelfLoop(n) => write!(f, "self-loop at {n:?}"),
            TopologyViolation::DuplicateLink(a, b) => {
                write!(f, "more than one link between {a:?} and {b:?}")
            }
            TopologyViolation::BadRate(i) => write!(f, "link #{i} has zero rate"),
            TopologyViolation::NegativePropagation(i) => {
                write!(f, "link #{i} has negative propagation delay")
            }
            TopologyViolation::Disconnected(n) => {
                write!(f, "node {n:?} is not connected to the rest of the graph")
            }
        }
    }
}

/// Result of [`validate_topology`]; empty `violations` means the graph is
/// well formed.
#[derive(Clone, Debug, Default)]
pub struct TopologyReport {
    pub violations: Vec<TopologyViolation>,
}

impl TopologyReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for TopologyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            write!(f, "topology ok")
        } else {
            writeln!(f, "{} violation(s):", self.violations.len())?;
            for v in &self.violations {
                writeln!(f, "  - {v}")?;
            }
            Ok(())
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum RouteError {
    #[error("no route from {talker:?} to {listener:?}")]
    NoRoute { talker: NodeId, listener: NodeId },
    #[error("node {0:?} does not exist or is not a host")]
    NotAHost(NodeId),
}

impl Topology {
    pub fn node_exists(&self, id: &str) -> bool {
        self.hosts.contains(id) || self.bridges.contains(id)
    }

    pub fn is_host(&self, id: &str) -> bool {
        self.hosts.contains(id)
    }

    pub fn is_bridge(&self, id: &str) -> bool {
        self.bridges.contains(id)
    }

    pub fn link_between(&self, a: &str, b: &str) -> Option<&LinkSpec> {
        self.links.iter().find(|l| l.joins(a, b))
    }

    /// Neighbours of `node`, in ascending id order for deterministic walks.
    pub fn neighbors(&self, node: &str) -> Vec<&NodeId> {
        let mut out: Vec<&NodeId> = self
            .links
            .iter()
            .filter_map(|l| {
                if l.endpoint_a == node {
                    Some(&l.endpoint_b)
                } else if l.endpoint_b == node {
                    Some(&l.endpoint_a)
                } else {
                    None
                }
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

/// Check structural invariants and return every violation found.
pub fn validate_topology(t: &Topology) -> TopologyReport {
    let mut violations = Vec::new();

    if t.hosts.is_empty() && t.bridges.is_empty() {
        violations.push(TopologyViolation::NoNodes);
        return TopologyReport { violations };
    }
    for h in &t.hosts {
        if t.bridges.contains(h) {
            violations.push(TopologyViolation::DuplicateNode(h.clone()));
        }
    }

    let mut seen_pairs: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    for (i, link) in t.links.iter().enumerate() {
        for end in [&link.endpoint_a, &link.endpoint_b] {
            if !t.node_exists(end) {
                violations.push(TopologyViolation::DanglingLink {
                    link: i,
                    node: end.clone(),
                });
            }
        }
        if link.endpoint_a == link.endpoint_b {
            violations.push(TopologyViolation::SelfLoop(link.endpoint_a.clone()));
        }
        let key = if link.endpoint_a <= link.endpoint_b {
            (link.endpoint_a.clone(), link.endpoint_b.clone())
        } else {
            (link.endpoint_b.clone(), link.endpoint_a.clone())
        };
        if !seen_pairs.insert(key.clone()) {
            violations.push(TopologyViolation::DuplicateLink(key.0, key.1));
        }
        if link.rate == 0 {
            violations.push(TopologyViolation::BadRate(i));
        }
        if link.propagation_delay.is_negative() {
            violations.push(TopologyViolation::NegativePropagation(i));
        }
    }

    // Connectivity: flood from the smallest node id.
    let all: BTreeSet<&NodeId> = t.hosts.iter().chain(t.bridges.iter()).collect();
    if let Some(&start) = all.iter().next() {
        let mut reached: BTreeSet<&NodeId> = BTreeSet::new();
        let mut queue = VecDeque::from([start]);
        reached.insert(start);
        while let Some(n) = queue.pop_front() {
            for nb in t.neighbors(n) {
                if all.contains(nb) && reached.insert(nb) {
                    queue.push_back(nb);
                }
            }
        }
        for &n in &all {
            if !reached.contains(n) {
                violations.push(TopologyViolation::Disconnected(n.clone()));
            }
        }
    }

    TopologyReport { violations }
}

/// Shortest hop-count path from `talker` to `listener`.
///
/// Among equal-length paths the lexicographically smallest node-id sequence
/// wins, so routing is deterministic. Zero-hop "paths" (talker == listener)
/// are rejected.
pub fn route(t: &Topology, talker: &str, listener: &str) -> Result<Vec<NodeId>, RouteError> {
    if !t.is_host(talker) {
        return Err(RouteError::NotAHost(talker.to_string()));
    }
    if !t.is_host(listener) {
        return Err(RouteError::NotAHost(listener.to_string()));
    }
    if talker == listener {
        return Err(RouteError::NoRoute {
            talker: talker.to_string(),
            listener: listener.to_string(),
        });
    }

    // Breadth-first distances towards the listener, then a greedy forward
    // walk picking the smallest next id keeps the sequence lexicographically
    // minimal among shortest paths.
    let mut dist: BTreeMap<&str, usize> = BTreeMap::new();
    dist.insert(listener, 0);
    let mut queue: VecDeque<&str> = VecDeque::from([listener]);
    while let Some(n) = queue.pop_front() {
        let d = dist[n];
        for nb in t.neighbors(n) {
            if !dist.contains_key(nb.as_str()) {
                dist.insert(nb, d + 1);
                queue.push_back(nb);
            }
        }
    }

    let Some(&total) = dist.get(talker) else {
        return Err(RouteError::NoRoute {
            talker: talker.to_string(),
            listener: listener.to_string(),
        });
    };

    let mut path: Vec<NodeId> = vec![talker.to_string()];
    let mut current = talker;
    let mut remaining = total;
    while remaining > 0 {
        let next = t
            .neighbors(current)
            .into_iter()
            .filter(|nb| dist.get(nb.as_str()) == Some(&(remaining - 1)))
            .min()
            .expect("BFS distance map is consistent");
        path.push(next.clone());
        current = path.last().unwrap();
        remaining -= 1;
    }
    Ok(path)
}
