use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::NodeId;

/// A directed overlay-to-overlay path.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tunnel {
    pub id: usize,
    pub path: Vec<NodeId>,
}

impl Tunnel {
    pub fn source(&self) -> NodeId {
        self.path[0]
    }

    pub fn destination(&self) -> NodeId {
        *self.path.last().expect("tunnel path is never empty")
    }

    /// Directed links `(path[i], path[i+1])` in traversal order.
    pub fn links(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.path.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn link_set(&self) -> BTreeSet<(NodeId, NodeId)> {
        self.links().collect()
    }
}

/// Canonical numbering of the `k(k-1)` ordered overlay pairs.
///
/// Tunnels are sorted by (source, destination); the index of `(s, d)` is
/// `rank(s)·(k-1) + rank'(d)` where `rank'` skips the source.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TunnelIndex {
    overlays: Vec<NodeId>,
}

impl TunnelIndex {
    pub fn new(mut overlays: Vec<NodeId>) -> Self {
        overlays.sort();
        overlays.dedup();
        TunnelIndex { overlays }
    }

    pub fn overlays(&self) -> &[NodeId] {
        &self.overlays
    }

    pub fn overlay_count(&self) -> usize {
        self.overlays.len()
    }

    pub fn len(&self) -> usize {
        let k = self.overlays.len();
        k * k.saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn rank(&self, overlay: NodeId) -> Option<usize> {
        self.overlays.binary_search(&overlay).ok()
    }

    pub fn index(&self, source: NodeId, destination: NodeId) -> Option<usize> {
        if source == destination {
            return None;
        }
        let s = self.rank(source)?;
        let d = self.rank(destination)?;
        let k = self.overlays.len();
        Some(s * (k - 1) + if d < s { d } else { d - 1 })
    }

    pub fn pair(&self, tunnel: usize) -> (NodeId, NodeId) {
        let k = self.overlays.len();
        let s = tunnel / (k - 1);
        let r = tunnel % (k - 1);
        let d = if r < s { r } else { r + 1 };
        (self.overlays[s], self.overlays[d])
    }

    pub fn pairs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.len()).map(|t| self.pair(t))
    }

    /// Label used in matrix files, `src>dst`.
    pub fn label(&self, tunnel: usize) -> String {
        let (s, d) = self.pair(tunnel);
        format!("{s}>{d}")
    }
}

/// One shortest-path tunnel per ordered overlay pair, in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TunnelSet {
    pub(crate) index: TunnelIndex,
    pub(crate) tunnels: Vec<Tunnel>,
}

impl TunnelSet {
    /// Assembles a tunnel set from explicit paths. Paths must be given in
    /// canonical order of their endpoints.
    pub fn from_paths(overlays: Vec<NodeId>, paths: Vec<Vec<NodeId>>) -> Option<Self> {
        let index = TunnelIndex::new(overlays);
        if paths.len() != index.len() {
            return None;
        }
        let mut tunnels = Vec::with_capacity(paths.len());
        for (id, path) in paths.into_iter().enumerate() {
            if path.len() < 2 || index.pair(id) != (path[0], *path.last().unwrap()) {
                return None;
            }
            tunnels.push(Tunnel { id, path });
        }
        Some(TunnelSet { index, tunnels })
    }

    pub fn index(&self) -> &TunnelIndex {
        &self.index
    }

    pub fn tunnels(&self) -> &[Tunnel] {
        &self.tunnels
    }

    pub fn len(&self) -> usize {
        self.tunnels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tunnels.is_empty()
    }

    pub fn get(&self, source: NodeId, destination: NodeId) -> Option<&Tunnel> {
        self.index
            .index(source, destination)
            .map(|i| &self.tunnels[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let idx = TunnelIndex::new(vec![NodeId(3), NodeId(1), NodeId(7), NodeId(4)]);
        assert_eq!(idx.len(), 12);
        let pairs: Vec<_> = idx.pairs().collect();
        let mut sorted = pairs.clone();
        sorted.sort();
        assert_eq!(pairs, sorted);
        for (t, (s, d)) in pairs.into_iter().enumerate() {
            assert_eq!(idx.index(s, d), Some(t));
        }
        assert_eq!(idx.index(NodeId(3), NodeId(3)), None);
        assert_eq!(idx.label(0), "1>3");
    }
}
