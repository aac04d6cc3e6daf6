//! Topology recovery from an interference matrix: exact algorithms for
//! trees and rings, and a heuristic for general networks that peels trees
//! off a multi-ring core.

mod general;
mod ring;
mod tree;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::RecoveredGraph;
use crate::graph::{GraphBuilder, NetworkGraph, NodeId, NodeKind};
use crate::interference::{ground_truth, InterferenceMatrix};

pub use general::{identify_general, sibling_groups};
pub use ring::{all_neighbors, identify_ring, identify_rings};
pub use tree::identify_tree;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeStage {
    /// The anchor overlay had no sibling.
    SiblingSearch,
    /// The rebuilt tree does not reproduce the matrix.
    Validation,
}

impl std::fmt::Display for TreeStage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TreeStage::SiblingSearch => "sibling search",
            TreeStage::Validation => "validation",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecoveryError {
    #[error("NotATree: {stage} failed: {detail}")]
    NotATree { stage: TreeStage, detail: String },
    #[error("NotARing: {0}")]
    NotARing(String),
    #[error("TooFewOverlays: ring recovery needs at least 5 overlays, got {0}")]
    TooFewOverlays(usize),
    #[error("overlay {0} does not appear in the interference matrix")]
    UnknownOverlay(NodeId),
}

/// A recovered topology that may not be a valid network, together with the
/// number of tunnel pairs on which its own interference matrix disagrees
/// with the input (`None` when the topology is not a valid network).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub graph: RecoveredGraph,
    pub f_distance: Option<usize>,
}

impl Reconstruction {
    /// Routes the topology and compares it against `f`.
    pub fn assess(overlays: Vec<NodeId>, edges: impl IntoIterator<Item = (NodeId, NodeId)>, f: &InterferenceMatrix) -> Self {
        let bare = RecoveredGraph::new(overlays, edges, Vec::new());
        match bare.network() {
            Ok(g) => {
                let (graph, dist) = assess_network(&g, f);
                Reconstruction {
                    graph,
                    f_distance: dist,
                }
            }
            Err(_) => Reconstruction {
                graph: bare,
                f_distance: None,
            },
        }
    }

    pub fn network(&self) -> Option<NetworkGraph> {
        self.graph.network().ok()
    }
}

fn assess_network(g: &NetworkGraph, f: &InterferenceMatrix) -> (RecoveredGraph, Option<usize>) {
    match (RecoveredGraph::from_network(g), ground_truth(g)) {
        (Ok(r), Ok(fg)) => (r, Some(fg.hamming_distance(f))),
        _ => (RecoveredGraph::new(g.overlays().collect(), g.edges(), Vec::new()), None),
    }
}

/// Groups of overlays believed to hang off a common tree.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiblingPartition {
    pub groups: Vec<BTreeSet<NodeId>>,
}

/// An interference matrix being whittled down during recovery.
///
/// Rows and columns always cover exactly the tunnels between live overlays.
/// A live overlay may stand for a node built earlier (a group's parent);
/// `rename_map` records which.
#[derive(Clone, Debug)]
pub struct WorkingInterference {
    original: InterferenceMatrix,
    matrix: InterferenceMatrix,
    live: BTreeSet<NodeId>,
    rename_map: BTreeMap<NodeId, NodeId>,
}

impl WorkingInterference {
    pub fn new(f: &InterferenceMatrix) -> Self {
        WorkingInterference {
            original: f.clone(),
            matrix: f.clone(),
            live: f.overlays().iter().copied().collect(),
            rename_map: BTreeMap::new(),
        }
    }

    pub fn matrix(&self) -> &InterferenceMatrix {
        &self.matrix
    }

    pub fn live_overlays(&self) -> &BTreeSet<NodeId> {
        &self.live
    }

    /// Node that overlay `o` currently stands for.
    pub fn current(&self, o: NodeId) -> NodeId {
        self.rename_map.get(&o).copied().unwrap_or(o)
    }

    pub fn rename(&mut self, o: NodeId, to: NodeId) {
        self.rename_map.insert(o, to);
    }

    /// Drops the overlays and every tunnel starting or ending at them.
    pub fn remove<'a>(&mut self, overlays: impl IntoIterator<Item = &'a NodeId>) {
        for o in overlays {
            self.live.remove(o);
        }
        let live: Vec<NodeId> = self.live.iter().copied().collect();
        self.matrix = self.original.restricted(&live);
    }
}

/// Whether `i` and `j` hang off the same router: neither tunnel between
/// them may interfere with a tunnel that both starts elsewhere and ends
/// elsewhere.
pub fn are_siblings(f: &InterferenceMatrix, i: NodeId, j: NodeId) -> bool {
    let idx = f.index();
    let clean = |s: NodeId, d: NodeId| {
        let Some(k) = idx.index(s, d) else { return false };
        f.row(k).iter().all(|l| {
            if l == k {
                return true;
            }
            let (ls, ld) = idx.pair(l);
            ls == s || ld == d
        })
    };
    i != j && clean(i, j) && clean(j, i)
}

/// Resolves the overlay argument of the recovery entry points.
fn restrict(f: &InterferenceMatrix, overlays: &[NodeId]) -> Result<InterferenceMatrix, RecoveryError> {
    for &o in overlays {
        if f.index().rank(o).is_none() {
            return Err(RecoveryError::UnknownOverlay(o));
        }
    }
    let mut os = overlays.to_vec();
    os.sort();
    os.dedup();
    if os == f.overlays() {
        Ok(f.clone())
    } else {
        Ok(f.restricted(&os))
    }
}

/// Builder seeded with the given overlays; fresh router ids start above
/// the largest overlay id.
struct Canvas {
    builder: GraphBuilder,
    next: u32,
}

impl Canvas {
    fn new(overlays: &[NodeId]) -> Self {
        let mut builder = GraphBuilder::new();
        for &o in overlays {
            builder.add_node(o, NodeKind::Overlay);
        }
        let next = overlays.iter().map(|o| o.0).max().unwrap_or(0) + 1;
        Canvas { builder, next }
    }

    fn router(&mut self) -> NodeId {
        let id = NodeId(self.next);
        self.next += 1;
        self.builder.add_node(id, NodeKind::Underlay);
        id
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::eval::{generate_minimal_ring, generate_minimal_tree};
    use crate::graph::build_network;
    use proptest::prelude::*;

    /// Seven hosts on a chain of three routers: 8 carries 1 and 2, 9
    /// carries 3 and 4, 10 carries 5, 6 and 7.
    pub(crate) fn seven_host_tree() -> NetworkGraph {
        build_network(
            7,
            3,
            &[(1, 8), (2, 8), (3, 9), (4, 9), (5, 10), (6, 10), (7, 10), (8, 9), (9, 10)],
        )
        .unwrap()
    }

    #[test]
    fn siblings_in_seven_host_tree() {
        let f = ground_truth(&seven_host_tree()).unwrap();
        let n = NodeId;
        assert!(are_siblings(&f, n(5), n(6)));
        assert!(are_siblings(&f, n(6), n(7)));
        assert!(are_siblings(&f, n(1), n(2)));
        assert!(!are_siblings(&f, n(5), n(3)));
        assert!(!are_siblings(&f, n(1), n(3)));
        assert!(!are_siblings(&f, n(5), n(5)));
    }

    #[test]
    fn two_overlays_are_siblings() {
        let f = InterferenceMatrix::for_overlays([NodeId(1), NodeId(2)]);
        assert!(are_siblings(&f, NodeId(1), NodeId(2)));
    }

    #[test]
    fn ring_overlays_never_siblings() {
        // from seven routers on, some tunnel crosses each ring link without
        // starting or ending next to it
        for k in 7..12 {
            let g = generate_minimal_ring(k, k as u64);
            let f = ground_truth(&g).unwrap();
            for &a in f.overlays() {
                for &b in f.overlays() {
                    assert!(!are_siblings(&f, a, b));
                }
            }
        }
        // in a five-ring, adjacent hosts pass the test
        let g = generate_minimal_ring(5, 0);
        let f = ground_truth(&g).unwrap();
        let order = crate::eval::ring_order(&g).unwrap();
        assert!(are_siblings(&f, order[0], order[1]));
    }

    #[test]
    fn working_interference_removal() {
        let f = ground_truth(&seven_host_tree()).unwrap();
        let mut w = WorkingInterference::new(&f);
        w.remove(&[NodeId(6), NodeId(7)]);
        assert_eq!(w.matrix().overlays().len(), 5);
        assert_eq!(w.matrix().len(), 20);
        w.rename(NodeId(5), NodeId(12));
        assert_eq!(w.current(NodeId(5)), NodeId(12));
        assert_eq!(w.current(NodeId(4)), NodeId(4));
    }

    proptest! {
        #[test]
        fn siblings_iff_common_parent(leaves in 3usize..16, seed in 0u64..1000) {
            let g = generate_minimal_tree(leaves, seed);
            let f = ground_truth(&g).unwrap();
            for a in g.overlays() {
                for b in g.overlays() {
                    if a != b {
                        prop_assert_eq!(are_siblings(&f, a, b), g.parent(a) == g.parent(b));
                    }
                }
            }
        }

        #[test]
        fn busiest_tunnel_parent_becomes_leaf(leaves in 3usize..16, seed in 0u64..1000) {
            let g = generate_minimal_tree(leaves, seed);
            let f = ground_truth(&g).unwrap();
            let k = (0..f.len())
                .max_by_key(|&k| (f.interference_count(k), std::cmp::Reverse(k)))
                .unwrap();
            let (s, _) = f.index().pair(k);
            let p = g.parent(s).unwrap();
            let leaf_children = g.neighbors(p).filter(|&n| g.is_overlay(n)).count();
            // the router keeps exactly one neighbour once its hosts are gone
            // (or none when it was the only router)
            let remaining = g.degree(p) - leaf_children;
            prop_assert!(remaining <= 1);
            prop_assert!(remaining == 1 || g.underlays().count() == 1);
        }
    }
}
