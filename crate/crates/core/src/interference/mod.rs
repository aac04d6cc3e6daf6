//! The binary tunnel interference matrix and its graph view.
//!
//! Two tunnels interfere when they traverse a common *directed* link: they
//! then share the FIFO queue of that link. Tunnels that use the same
//! undirected edge in opposite directions do not interfere.

mod file;
mod sim;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::BitSet;
use crate::graph::{enumerate_tunnels, GraphError, NetworkGraph, NodeId, TunnelIndex, TunnelSet};

pub use file::{parse_matrix_csv, write_matrix_csv};
pub use sim::{
    infer_interference_matrix, regress_alpha, simulate_paths, simulate_traffic, Sample,
    TrafficConfig, TrafficTrace,
};

#[derive(Debug, Error)]
pub enum InterferenceError {
    #[error("matrix file: {0}")]
    File(String),
    #[error("matrix is not symmetric at ({0}, {1})")]
    Asymmetric(String, String),
    #[error("simulation collected {collected} samples, fewer than the required {required}")]
    SimulationHorizonTooShort { collected: usize, required: usize },
    #[error("regressor has zero variance")]
    DegenerateRegressor,
    #[error("invalid traffic configuration: {0}")]
    InvalidConfig(String),
    #[error("tunnels must be distinct")]
    SameTunnel,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Symmetric L×L 0/1 matrix over the canonical tunnel order. The diagonal
/// is always 1 and is ignored by every consumer.
#[derive(Clone, PartialEq, Eq)]
pub struct InterferenceMatrix {
    index: TunnelIndex,
    rows: Vec<BitSet>,
}

impl InterferenceMatrix {
    /// Matrix with no off-diagonal interference.
    pub fn identity(index: TunnelIndex) -> Self {
        let n = index.len();
        let rows = (0..n)
            .map(|i| {
                let mut r = BitSet::new(n);
                r.insert(i);
                r
            })
            .collect();
        InterferenceMatrix { index, rows }
    }

    pub fn for_overlays(overlays: impl IntoIterator<Item = NodeId>) -> Self {
        Self::identity(TunnelIndex::new(overlays.into_iter().collect()))
    }

    pub fn index(&self) -> &TunnelIndex {
        &self.index
    }

    pub fn overlays(&self) -> &[NodeId] {
        self.index.overlays()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, k: usize, l: usize) -> bool {
        self.rows[k].contains(l)
    }

    /// Sets `F[k][l]` and `F[l][k]`. Diagonal writes are ignored.
    pub fn set(&mut self, k: usize, l: usize, value: bool) {
        if k == l {
            return;
        }
        self.rows[k].set(l, value);
        self.rows[l].set(k, value);
    }

    /// Row `k` including the diagonal bit.
    pub fn row(&self, k: usize) -> &BitSet {
        &self.rows[k]
    }

    /// Number of other tunnels that tunnel `k` interferes with.
    pub fn interference_count(&self, k: usize) -> usize {
        self.rows[k].count() - 1
    }

    /// Unordered interfering pairs `(k, l)` with `k < l`.
    pub fn interfering_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(k, r)| r.iter().filter(move |&l| l > k).map(move |l| (k, l)))
    }

    pub fn interfering_pair_count(&self) -> usize {
        (self.rows.iter().map(BitSet::count).sum::<usize>() - self.len()) / 2
    }

    pub fn entry(&self, a: (NodeId, NodeId), b: (NodeId, NodeId)) -> Option<bool> {
        let k = self.index.index(a.0, a.1)?;
        let l = self.index.index(b.0, b.1)?;
        Some(self.get(k, l))
    }

    /// Matrix restricted to tunnels whose endpoints both lie in `overlays`.
    pub fn restricted(&self, overlays: &[NodeId]) -> InterferenceMatrix {
        let sub = TunnelIndex::new(overlays.to_vec());
        let map: Vec<usize> = sub
            .pairs()
            .map(|(s, d)| self.index.index(s, d).expect("subset of overlays"))
            .collect();
        let mut out = InterferenceMatrix::identity(sub);
        for (i, &oi) in map.iter().enumerate() {
            for (j, &oj) in map.iter().enumerate().skip(i + 1) {
                if self.get(oi, oj) {
                    out.set(i, j, true);
                }
            }
        }
        out
    }

    /// Number of unordered tunnel pairs, over the tunnels common to both
    /// matrices (matched by endpoint labels), whose entries differ.
    pub fn hamming_distance(&self, other: &InterferenceMatrix) -> usize {
        let common: Vec<NodeId> = self
            .overlays()
            .iter()
            .copied()
            .filter(|o| other.index.rank(*o).is_some())
            .collect();
        let a = if common.len() == self.overlays().len() {
            None
        } else {
            Some(self.restricted(&common))
        };
        let b = if common.len() == other.overlays().len() {
            None
        } else {
            Some(other.restricted(&common))
        };
        let a = a.as_ref().unwrap_or(self);
        let b = b.as_ref().unwrap_or(other);
        a.rows
            .iter()
            .zip(&b.rows)
            .map(|(x, y)| {
                let mut d = x.clone();
                d.difference_with(y);
                let mut e = y.clone();
                e.difference_with(x);
                d.count() + e.count()
            })
            .sum::<usize>()
            / 2
    }
}

impl std::fmt::Debug for InterferenceMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let pairs: Vec<(String, String)> = self
            .interfering_pairs()
            .map(|(k, l)| (self.index.label(k), self.index.label(l)))
            .collect();
        f.debug_struct("InterferenceMatrix")
            .field("overlays", &self.index.overlays())
            .field("interfering", &pairs)
            .finish()
    }
}

/// `F[k][l] = 1` iff tunnels `k` and `l` share a directed link.
pub fn compute_interference_matrix(tunnels: &TunnelSet) -> InterferenceMatrix {
    let n = tunnels.len();
    let mut by_link: HashMap<(NodeId, NodeId), BitSet> = HashMap::new();
    for t in tunnels.tunnels() {
        for link in t.links() {
            by_link
                .entry(link)
                .or_insert_with(|| BitSet::new(n))
                .insert(t.id);
        }
    }
    let mut rows = Vec::with_capacity(n);
    for t in tunnels.tunnels() {
        let mut row = BitSet::new(n);
        row.insert(t.id);
        for link in t.links() {
            row.union_with(&by_link[&link]);
        }
        rows.push(row);
    }
    InterferenceMatrix {
        index: tunnels.index().clone(),
        rows,
    }
}

/// Routes all tunnels of `g` and computes their interference.
pub fn ground_truth(g: &NetworkGraph) -> Result<InterferenceMatrix, GraphError> {
    Ok(compute_interference_matrix(&enumerate_tunnels(g)?))
}

/// Tunnels as vertices, interferences as edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterferenceGraph {
    adj: Vec<Vec<usize>>,
}

impl InterferenceGraph {
    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); vertex_count];
        for &(a, b) in edges {
            if a != b && !adj[a].contains(&b) {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for row in adj.iter_mut() {
            row.sort_unstable();
        }
        InterferenceGraph { adj }
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    /// Edges `(a, b)` with `a < b`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(a, ns)| ns.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
    }
}

pub fn build_interference_graph(f: &InterferenceMatrix) -> InterferenceGraph {
    let edges: Vec<(usize, usize)> = f.interfering_pairs().collect();
    InterferenceGraph::from_edges(f.len(), &edges)
}
