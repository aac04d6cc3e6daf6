use super::{GraphBuilder, NetworkGraph, NodeId, NodeKind};

/// Removes dangling underlay nodes and splices out degree-2 underlay nodes
/// until every remaining underlay node has at least three neighbours.
///
/// Nodes are processed one at a time in ascending id order. A degree-2 node
/// whose two neighbours are both overlays is kept: splicing it would join two
/// hosts directly. When the two neighbours are already adjacent the node is
/// simply dropped.
pub fn reduce_to_minimal(g: &NetworkGraph) -> NetworkGraph {
    let mut b = g.to_builder();
    while let Some(node) = next_reducible(&b) {
        let ns: Vec<NodeId> = b.neighbors(node).collect();
        b.remove_node(node);
        if let [a, c] = ns[..] {
            b.add_edge(a, c);
        }
    }
    b.build()
        .expect("reduction preserves overlay degrees and connectivity")
}

fn next_reducible(b: &GraphBuilder) -> Option<NodeId> {
    b.nodes().find(|&id| {
        if b.kind(id) != Some(NodeKind::Underlay) {
            return false;
        }
        let ns: Vec<NodeId> = b.neighbors(id).collect();
        match ns[..] {
            [] => b.nodes().count() > 1,
            [n] => b.kind(n) == Some(NodeKind::Underlay),
            [x, y] => !(b.kind(x) == Some(NodeKind::Overlay) && b.kind(y) == Some(NodeKind::Overlay)),
            _ => false,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_network;

    #[test]
    fn chain_collapses_to_single_hub() {
        // o1 - u3 - u4 - u5 - o2
        let g = build_network(2, 3, &[(1, 3), (3, 4), (4, 5), (5, 2)]).unwrap();
        let r = reduce_to_minimal(&g);
        assert_eq!(r.node_count(), 3);
        assert_eq!(r.edge_count(), 2);
        let hub = r.parent(NodeId(1)).unwrap();
        assert_eq!(r.parent(NodeId(2)), Some(hub));
    }

    #[test]
    fn minimal_tree_is_a_fixed_point() {
        let g = build_network(
            4,
            2,
            &[(1, 5), (2, 5), (3, 6), (4, 6), (5, 6)],
        )
        .unwrap();
        assert_eq!(reduce_to_minimal(&g), g);
    }

    #[test]
    fn dangling_underlay_chain_is_removed() {
        // star on 4 with a two-node spur 5-6 that carries no host
        let g = build_network(3, 3, &[(1, 4), (2, 4), (3, 4), (4, 5), (5, 6)]).unwrap();
        let r = reduce_to_minimal(&g);
        assert_eq!(r.node_count(), 4);
        assert_eq!(r.edge_count(), 3);
    }

    #[test]
    fn triangle_shortcut_drops_redundant_node() {
        // 4-5-6 triangle plus 7 hanging between 4 and 5
        let g = build_network(
            3,
            4,
            &[(1, 4), (2, 5), (3, 6), (4, 5), (5, 6), (6, 4), (4, 7), (7, 5)],
        )
        .unwrap();
        let r = reduce_to_minimal(&g);
        assert!(!r.contains(NodeId(7)));
        assert_eq!(r.edge_count(), 6);
    }
}
