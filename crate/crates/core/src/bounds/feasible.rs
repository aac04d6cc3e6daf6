//! A feasible (generally far from minimal) network for any interference
//! matrix: every interfering pair gets a private link on a line, and the
//! pieces of each tunnel are stitched together with dedicated detours.

use std::collections::BTreeSet;

use crate::graph::NodeId;
use crate::interference::{build_interference_graph, InterferenceGraph, InterferenceMatrix};

use super::RecoveredGraph;

/// Result of laying out the interference edges on a line and joining the
/// pieces of each tunnel. Nodes are numbered from 0; the line occupies
/// nodes `0..=line_len`, relays follow.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineLayout {
    pub line_len: usize,
    pub node_count: usize,
    /// Undirected edges `(low, high)`.
    pub edges: BTreeSet<(usize, usize)>,
    /// For each tunnel, its partial route through the layout (empty for a
    /// tunnel that interferes with nothing).
    pub partial: Vec<Vec<usize>>,
}

impl LineLayout {
    /// Line edge `i` joins nodes `i` and `i + 1` and carries the `i`-th
    /// interference edge in ascending order. Gaps between consecutive line
    /// edges of one tunnel are bridged by a direct chord when the two nodes
    /// are not yet adjacent, and otherwise by a fresh relay node; either way
    /// the detour belongs to that tunnel alone.
    pub fn new(gf: &InterferenceGraph) -> Self {
        let pairs: Vec<(usize, usize)> = gf.edges().collect();
        let line_len = pairs.len();
        let mut edges: BTreeSet<(usize, usize)> = (0..line_len).map(|i| (i, i + 1)).collect();
        let mut node_count = if line_len == 0 { 0 } else { line_len + 1 };
        let mut fragments = vec![Vec::new(); gf.vertex_count()];
        for (i, &(k, l)) in pairs.iter().enumerate() {
            fragments[k].push(i);
            fragments[l].push(i);
        }
        let mut partial = Vec::with_capacity(fragments.len());
        for frags in &fragments {
            let mut path = Vec::new();
            for (n, &i) in frags.iter().enumerate() {
                if n == 0 {
                    path.push(i);
                } else {
                    let from = *path.last().expect("non-empty");
                    if from != i {
                        let key = (from.min(i), from.max(i));
                        if edges.insert(key) {
                            // direct chord
                        } else {
                            let relay = node_count;
                            node_count += 1;
                            edges.insert((from, relay));
                            edges.insert((i, relay));
                            path.push(relay);
                        }
                        path.push(i);
                    }
                }
                path.push(i + 1);
            }
            partial.push(path);
        }
        LineLayout {
            line_len,
            node_count,
            edges,
            partial,
        }
    }
}

/// Builds a network satisfying every constraint for `f`. Overlays keep their
/// ids; all other nodes are numbered above the largest overlay id.
///
/// Tunnels leaving (or entering) the same overlay always share its access
/// link, so `f` must mark them as interfering, as every matrix measured on
/// a real network does.
pub fn feasible_graph(f: &InterferenceMatrix) -> RecoveredGraph {
    let layout = LineLayout::new(&build_interference_graph(f));
    let overlays = f.overlays().to_vec();
    let base = overlays.iter().map(|o| o.0).max().unwrap_or(0) + 1;
    let node = |i: usize| NodeId(base + i as u32);
    let parent = |o: NodeId| {
        let rank = f.index().rank(o).expect("overlay of f");
        NodeId(base + (layout.node_count + rank) as u32)
    };

    let mut edges: BTreeSet<(NodeId, NodeId)> = layout
        .edges
        .iter()
        .map(|&(a, b)| (node(a), node(b)))
        .collect();
    for &o in &overlays {
        edges.insert((o, parent(o)));
    }
    let mut paths = Vec::with_capacity(f.len());
    for (t, partial) in layout.partial.iter().enumerate() {
        let (s, d) = f.index().pair(t);
        let (ps, pd) = (parent(s), parent(d));
        let mut path = vec![s, ps];
        path.extend(partial.iter().map(|&i| node(i)));
        path.extend([pd, d]);
        for w in path[1..path.len() - 1].windows(2) {
            edges.insert((w[0].min(w[1]), w[0].max(w[1])));
        }
        paths.push(path);
    }
    RecoveredGraph::new(overlays, edges, paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{upper_bound, verify_solution};
    use crate::graph::{build_network, enumerate_tunnels, grid_network};
    use crate::interference::{compute_interference_matrix, ground_truth};
    use proptest::prelude::*;

    #[test]
    fn path_interference_graph_layout() {
        // tunnels a, b, c, d with interference a-b, b-c, c-d
        let gf = InterferenceGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        let layout = LineLayout::new(&gf);
        assert_eq!(layout.line_len, 3);
        assert_eq!(layout.edges.len(), 3);
        assert_eq!(layout.partial[0], vec![0, 1]);
        assert_eq!(layout.partial[1], vec![0, 1, 2]);
        assert_eq!(layout.partial[2], vec![1, 2, 3]);
        assert_eq!(layout.partial[3], vec![2, 3]);
    }

    #[test]
    fn gaps_get_private_detours() {
        // tunnel 0 interferes with 1 and 3; tunnel 2 with 1 and 3 as well:
        // line edges (0,1) (0,3) (1,2) (2,3)
        let gf = InterferenceGraph::from_edges(4, &[(0, 1), (0, 3), (1, 2), (2, 3)]);
        let layout = LineLayout::new(&gf);
        assert_eq!(layout.partial[0], vec![0, 1, 2]);
        // tunnel 1: line edges 0 and 2, bridged 1 -> 2 is already a line
        // edge, so a relay is inserted
        assert_eq!(layout.partial[1], vec![0, 1, 5, 2, 3]);
        // tunnel 3: line edges 1 and 3, and 2 -> 3 is a line edge too
        assert_eq!(layout.partial[3], vec![1, 2, 6, 3, 4]);
        for p in &layout.partial {
            let set: BTreeSet<usize> = p.iter().copied().collect();
            assert_eq!(set.len(), p.len());
        }
    }

    #[test]
    fn edgeless_matrix() {
        let f = InterferenceMatrix::for_overlays([NodeId(1), NodeId(2)]);
        let r = feasible_graph(&f);
        assert_eq!(r.paths[0], [1, 3, 4, 2].map(NodeId).to_vec());
        assert_eq!(r.paths[1], [2, 4, 3, 1].map(NodeId).to_vec());
        assert_eq!(r.edge_count(), 3);
        assert!(verify_solution(&f, &r).unwrap().feasible());
        assert!(r.edge_count() <= upper_bound(&f));
    }

    #[test]
    fn single_pair() {
        let mut f = InterferenceMatrix::for_overlays([NodeId(1), NodeId(2), NodeId(3)]);
        for a in 0..f.len() {
            for b in 0..f.len() {
                let (pa, pb) = (f.index().pair(a), f.index().pair(b));
                if pa.0 == pb.0 || pa.1 == pb.1 {
                    f.set(a, b, true);
                }
            }
        }
        let k = f.index().index(NodeId(1), NodeId(2)).unwrap();
        let l = f.index().index(NodeId(3), NodeId(2)).unwrap();
        f.set(k, l, true);
        let r = feasible_graph(&f);
        let v = verify_solution(&f, &r).unwrap();
        assert!(v.feasible(), "{v:?}");
        assert!(r.network().is_ok());
    }

    #[test]
    fn grid_feasible_within_bound() {
        let f = ground_truth(&grid_network()).unwrap();
        let r = feasible_graph(&f);
        assert!(verify_solution(&f, &r).unwrap().feasible());
        assert!(r.edge_count() <= upper_bound(&f));
        assert!(r.network().is_ok());
    }

    fn random_network(seed: u64) -> crate::graph::NetworkGraph {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let k = rng.random_range(2..5u32);
        let m = rng.random_range(2..6u32);
        let mut edges: Vec<(u32, u32)> = (1..m).map(|i| (k + 1 + rng.random_range(0..i), k + 1 + i)).collect();
        if m > 2 && rng.random_bool(0.5) {
            edges.push((k + 1, k + m));
        }
        for o in 1..=k {
            edges.push((o, k + 1 + rng.random_range(0..m)));
        }
        edges.sort();
        edges.dedup();
        build_network(k as usize, m as usize, &edges).unwrap()
    }

    proptest! {
        #[test]
        fn always_feasible_and_bounded(seed in 0u64..5000) {
            let g = random_network(seed);
            let f = compute_interference_matrix(&enumerate_tunnels(&g).unwrap());
            let r = feasible_graph(&f);
            let v = verify_solution(&f, &r).unwrap();
            prop_assert!(v.feasible(), "{:?}", v);
            prop_assert!(r.edge_count() <= upper_bound(&f));
        }
    }
}
