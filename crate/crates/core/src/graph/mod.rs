//! Network graphs with overlay hosts and underlay routers.
//!
//! Every link is undirected with unit capacity and stands for the two
//! directed links `(i, j)` and `(j, i)`. Overlay nodes are the measurable
//! end hosts; each one hangs off exactly one neighbour. Underlay nodes are
//! routers that give no feedback.
//!
//! Graphs built from external input use the id convention `1..=k` for the
//! `k` overlays and `k+1..` for underlays. Graphs produced internally (by
//! reduction or recovery) may carry gaps in their underlay ids; see
//! [`NetworkGraph::compacted`].

mod io;
mod reduce;
mod routing;
mod tunnel;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{parse_graph, to_dot, write_graph};
pub use reduce::reduce_to_minimal;
pub use routing::{enumerate_tunnels, shortest_path_route};
pub use tunnel::{Tunnel, TunnelIndex, TunnelSet};

#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for NodeId {
    fn from(v: u32) -> Self {
        NodeId(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Overlay,
    Underlay,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(NodeId, NodeId),
    #[error("self loop at node {0}")]
    SelfLoop(NodeId),
    #[error("overlay node {node} has {degree} incident edges, expected exactly one")]
    OverlayDegreeViolation { node: NodeId, degree: usize },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("node {0} is not part of the graph")]
    UnknownNode(NodeId),
    #[error("node {0} is not an overlay node")]
    NotOverlay(NodeId),
    #[error("a tunnel needs two distinct endpoints, got {0} twice")]
    SameEndpoints(NodeId),
    #[error("no path from {0} to {1}")]
    Unreachable(NodeId, NodeId),
    #[error("graph has no overlay nodes")]
    NoOverlays,
    #[error("overlay ids must be 1..={0} to be written in the graph file format")]
    NonCanonicalOverlays(usize),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A validated, immutable network topology.
#[derive(Clone, PartialEq, Eq)]
pub struct NetworkGraph {
    kinds: BTreeMap<NodeId, NodeKind>,
    adj: BTreeMap<NodeId, BTreeSet<NodeId>>,
}

/// Builds a network with overlays `1..=overlay_count` and underlays
/// `overlay_count+1..=overlay_count+underlay_count`.
pub fn build_network(
    overlay_count: usize,
    underlay_count: usize,
    edges: &[(u32, u32)],
) -> Result<NetworkGraph, GraphError> {
    let mut builder = GraphBuilder::new();
    for id in 1..=overlay_count as u32 {
        builder.add_node(NodeId(id), NodeKind::Overlay);
    }
    for id in 1..=underlay_count as u32 {
        builder.add_node(NodeId(overlay_count as u32 + id), NodeKind::Underlay);
    }
    for &(a, b) in edges {
        builder.try_add_edge(NodeId(a), NodeId(b))?;
    }
    builder.build()
}

impl NetworkGraph {
    pub fn node_count(&self) -> usize {
        self.kinds.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.values().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.kinds.keys().copied()
    }

    pub fn overlays(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.kinds
            .iter()
            .filter(|(_, k)| **k == NodeKind::Overlay)
            .map(|(id, _)| *id)
    }

    pub fn underlays(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.kinds
            .iter()
            .filter(|(_, k)| **k == NodeKind::Underlay)
            .map(|(id, _)| *id)
    }

    pub fn overlay_count(&self) -> usize {
        self.overlays().count()
    }

    pub fn kind(&self, id: NodeId) -> Option<NodeKind> {
        self.kinds.get(&id).copied()
    }

    pub fn is_overlay(&self, id: NodeId) -> bool {
        self.kind(id) == Some(NodeKind::Overlay)
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.kinds.contains_key(&id)
    }

    pub fn neighbors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adj.get(&id).into_iter().flatten().copied()
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.adj.get(&id).map_or(0, BTreeSet::len)
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.adj.get(&a).is_some_and(|n| n.contains(&b))
    }

    /// Undirected edges as `(low, high)` pairs in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adj
            .iter()
            .flat_map(|(&a, ns)| ns.range(a..).map(move |&b| (a, b)))
    }

    /// The single neighbour of an overlay node.
    pub fn parent(&self, overlay: NodeId) -> Option<NodeId> {
        if !self.is_overlay(overlay) {
            return None;
        }
        self.neighbors(overlay).next()
    }

    pub fn max_id(&self) -> u32 {
        self.kinds.keys().next_back().map_or(0, |id| id.0)
    }

    /// True when the overlays are exactly `1..=k`.
    pub fn has_canonical_overlays(&self) -> bool {
        self.overlays()
            .enumerate()
            .all(|(i, id)| id.0 as usize == i + 1)
    }

    /// Renumbers underlay nodes to `k+1..=k+m` preserving their relative order.
    /// Overlay ids are left untouched and must already be `1..=k`.
    pub fn compacted(&self) -> Result<NetworkGraph, GraphError> {
        let k = self.overlay_count();
        if !self.has_canonical_overlays() {
            return Err(GraphError::NonCanonicalOverlays(k));
        }
        let mut map = BTreeMap::new();
        for id in self.overlays() {
            map.insert(id, id);
        }
        for (i, id) in self.underlays().enumerate() {
            map.insert(id, NodeId((k + i + 1) as u32));
        }
        Ok(self.relabeled(&map))
    }

    /// Applies an injective relabelling. Node kinds follow their nodes.
    pub fn relabeled(&self, map: &BTreeMap<NodeId, NodeId>) -> NetworkGraph {
        let kinds = self.kinds.iter().map(|(id, k)| (map[id], *k)).collect();
        let mut adj: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
        for (id, ns) in &self.adj {
            adj.insert(map[id], ns.iter().map(|n| map[n]).collect());
        }
        NetworkGraph { kinds, adj }
    }

    pub fn to_builder(&self) -> GraphBuilder {
        GraphBuilder {
            kinds: self.kinds.clone(),
            adj: self.adj.clone(),
        }
    }

    pub fn is_connected(&self) -> bool {
        is_connected(&self.adj)
    }

    /// Hop distances from `source` to every reachable node.
    pub fn bfs_distances(&self, source: NodeId) -> BTreeMap<NodeId, usize> {
        let mut dist = BTreeMap::new();
        dist.insert(source, 0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[&u];
            for v in self.neighbors(u) {
                if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(v) {
                    e.insert(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

impl fmt::Debug for NetworkGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let overlays: Vec<_> = self.overlays().map(|n| n.0).collect();
        let edges: Vec<_> = self.edges().map(|(a, b)| (a.0, b.0)).collect();
        f.debug_struct("NetworkGraph")
            .field("overlays", &overlays)
            .field("edges", &edges)
            .finish()
    }
}

fn is_connected(adj: &BTreeMap<NodeId, BTreeSet<NodeId>>) -> bool {
    let Some(&start) = adj.keys().next() else {
        return true;
    };
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for &v in &adj[&u] {
            if seen.insert(v) {
                stack.push(v);
            }
        }
    }
    seen.len() == adj.len()
}

/// Mutable graph under construction. Validation happens in [`GraphBuilder::build`].
#[derive(Clone, Debug, Default)]
pub struct GraphBuilder {
    kinds: BTreeMap<NodeId, NodeKind>,
    adj: BTreeMap<NodeId, BTreeSet<NodeId>>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, id: NodeId, kind: NodeKind) {
        self.kinds.insert(id, kind);
        self.adj.entry(id).or_default();
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.kinds.contains_key(&id)
    }

    pub fn kind(&self, id: NodeId) -> Option<NodeKind> {
        self.kinds.get(&id).copied()
    }

    /// Adds an edge, ignoring it when already present.
    pub fn add_edge(&mut self, a: NodeId, b: NodeId) {
        debug_assert!(a != b);
        self.adj.entry(a).or_default().insert(b);
        self.adj.entry(b).or_default().insert(a);
    }

    pub fn try_add_edge(&mut self, a: NodeId, b: NodeId) -> Result<(), GraphError> {
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        for id in [a, b] {
            if !self.kinds.contains_key(&id) {
                return Err(GraphError::UnknownNode(id));
            }
        }
        if self.has_edge(a, b) {
            return Err(GraphError::DuplicateEdge(a.min(b), a.max(b)));
        }
        self.add_edge(a, b);
        Ok(())
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.adj.get(&a).is_some_and(|n| n.contains(&b))
    }

    pub fn remove_edge(&mut self, a: NodeId, b: NodeId) {
        if let Some(n) = self.adj.get_mut(&a) {
            n.remove(&b);
        }
        if let Some(n) = self.adj.get_mut(&b) {
            n.remove(&a);
        }
    }

    pub fn remove_node(&mut self, id: NodeId) {
        if let Some(ns) = self.adj.remove(&id) {
            for n in ns {
                if let Some(set) = self.adj.get_mut(&n) {
                    set.remove(&id);
                }
            }
        }
        self.kinds.remove(&id);
    }

    pub fn neighbors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adj.get(&id).into_iter().flatten().copied()
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.adj.get(&id).map_or(0, BTreeSet::len)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.kinds.keys().copied()
    }

    pub fn max_id(&self) -> u32 {
        self.kinds.keys().next_back().map_or(0, |id| id.0)
    }

    /// Validates all graph invariants.
    pub fn build(self) -> Result<NetworkGraph, GraphError> {
        if !self.kinds.values().any(|k| *k == NodeKind::Overlay) {
            return Err(GraphError::NoOverlays);
        }
        for (&id, &kind) in &self.kinds {
            if kind == NodeKind::Overlay {
                let degree = self.adj.get(&id).map_or(0, BTreeSet::len);
                if degree != 1 {
                    return Err(GraphError::OverlayDegreeViolation { node: id, degree });
                }
            }
        }
        if !is_connected(&self.adj) {
            return Err(GraphError::Disconnected);
        }
        Ok(NetworkGraph {
            kinds: self.kinds,
            adj: self.adj,
        })
    }
}

/// A 3x2 underlay grid with one host per router.
///
/// Top row 8-9-12, bottom row 7-10-11, rungs 8-7, 9-10 and 12-11; hosts
/// 1..=6 attach to 8, 9, 12, 7, 10, 11.
pub fn grid_network() -> NetworkGraph {
    let edges = [
        (8, 9),
        (9, 12),
        (7, 10),
        (10, 11),
        (8, 7),
        (9, 10),
        (12, 11),
        (1, 8),
        (2, 9),
        (3, 12),
        (4, 7),
        (5, 10),
        (6, 11),
    ];
    build_network(6, 6, &edges).expect("grid is a valid network")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> NetworkGraph {
        grid_network()
    }

    #[test]
    fn grid_network_is_valid() {
        let g = grid();
        assert_eq!(g.edge_count(), 13);
        assert_eq!(g.overlay_count(), 6);
        assert_eq!(g.parent(NodeId(1)), Some(NodeId(8)));
    }

    #[test]
    fn smallest_network() {
        let g = build_network(2, 2, &[(1, 3), (3, 4), (4, 2)]).unwrap();
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn overlay_with_two_neighbors_is_rejected() {
        let err = build_network(2, 2, &[(1, 3), (1, 4), (3, 4), (4, 2)]).unwrap_err();
        assert_eq!(
            err,
            GraphError::OverlayDegreeViolation {
                node: NodeId(1),
                degree: 2
            }
        );
    }

    #[test]
    fn structural_errors() {
        assert_eq!(
            build_network(2, 1, &[(1, 3), (3, 1)]).unwrap_err(),
            GraphError::DuplicateEdge(NodeId(1), NodeId(3))
        );
        assert_eq!(
            build_network(2, 1, &[(3, 3)]).unwrap_err(),
            GraphError::SelfLoop(NodeId(3))
        );
        assert_eq!(
            build_network(2, 2, &[(1, 3), (2, 4)]).unwrap_err(),
            GraphError::Disconnected
        );
        assert_eq!(
            build_network(2, 1, &[(1, 9)]).unwrap_err(),
            GraphError::UnknownNode(NodeId(9))
        );
    }

    #[test]
    fn compaction_keeps_order() {
        let mut b = GraphBuilder::new();
        b.add_node(NodeId(1), NodeKind::Overlay);
        b.add_node(NodeId(2), NodeKind::Overlay);
        b.add_node(NodeId(10), NodeKind::Underlay);
        b.add_edge(NodeId(1), NodeId(10));
        b.add_edge(NodeId(2), NodeId(10));
        let g = b.build().unwrap().compacted().unwrap();
        assert_eq!(
            g.edges().collect::<Vec<_>>(),
            vec![(NodeId(1), NodeId(3)), (NodeId(2), NodeId(3))]
        );
    }
}
