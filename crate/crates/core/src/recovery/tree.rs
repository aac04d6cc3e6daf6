//! Tree recovery by repeatedly collapsing a sibling group into its parent.

use std::collections::BTreeSet;

use crate::bounds::RecoveredGraph;
use crate::graph::NodeId;
use crate::interference::{ground_truth, InterferenceMatrix};

use super::{are_siblings, restrict, Canvas, RecoveryError, TreeStage, WorkingInterference};

/// Rebuilds the tree, if any, whose interference matrix over `overlays` is
/// `f` restricted to them.
///
/// Each round picks the tunnel interfering with the most others (lowest
/// index on ties); its source's siblings are joined under a new router and
/// all but the source are dropped, the source standing in for that router
/// from then on. Stops with one live overlay, or joins the last two
/// directly. The result is checked by routing it and comparing matrices.
pub fn identify_tree(f: &InterferenceMatrix, overlays: &[NodeId]) -> Result<RecoveredGraph, RecoveryError> {
    identify_tree_groups(f, overlays).map(|(g, _)| g)
}

/// Also returns the sibling group found in each round (original overlay ids
/// of the live members at that time).
pub(crate) fn identify_tree_groups(
    f: &InterferenceMatrix,
    overlays: &[NodeId],
) -> Result<(RecoveredGraph, Vec<BTreeSet<NodeId>>), RecoveryError> {
    let f = restrict(f, overlays)?;
    let mut canvas = Canvas::new(f.overlays());
    let mut w = WorkingInterference::new(&f);
    let mut groups = Vec::new();
    loop {
        let live: Vec<NodeId> = w.live_overlays().iter().copied().collect();
        match live[..] {
            [] | [_] => break,
            [a, b] => {
                canvas.builder.add_edge(w.current(a), w.current(b));
                break;
            }
            _ => {}
        }
        let m = w.matrix();
        let best = (0..m.len())
            .max_by_key(|&k| (m.interference_count(k), std::cmp::Reverse(k)))
            .expect("at least six tunnels");
        let anchor = m.index().pair(best).0;
        let group: BTreeSet<NodeId> = live
            .iter()
            .copied()
            .filter(|&i| i == anchor || are_siblings(m, anchor, i))
            .collect();
        if group.len() < 2 {
            return Err(RecoveryError::NotATree {
                stage: TreeStage::SiblingSearch,
                detail: format!("overlay {anchor} has no sibling among {} live overlays", live.len()),
            });
        }
        let parent = canvas.router();
        for &i in &group {
            canvas.builder.add_edge(parent, w.current(i));
        }
        let dropped: Vec<NodeId> = group.iter().copied().filter(|&i| i != anchor).collect();
        w.remove(&dropped);
        w.rename(anchor, parent);
        groups.push(group);
    }

    let invalid = |detail: String| RecoveryError::NotATree {
        stage: TreeStage::Validation,
        detail,
    };
    let g = canvas
        .builder
        .build()
        .map_err(|e| invalid(format!("rebuilt graph is not a network: {e}")))?;
    let fg = ground_truth(&g).map_err(|e| invalid(e.to_string()))?;
    let d = fg.hamming_distance(&f);
    if d != 0 {
        return Err(invalid(format!("rebuilt tree disagrees on {d} tunnel pairs")));
    }
    let r = RecoveredGraph::from_network(&g).map_err(|e| invalid(e.to_string()))?;
    Ok((r, groups))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{edit_distance, generate_minimal_ring, generate_minimal_tree, pad_with_relays, EditMode};
    use crate::graph::{build_network, reduce_to_minimal};
    use crate::recovery::tests::seven_host_tree;
    use proptest::prelude::*;

    fn ids(v: &[u32]) -> BTreeSet<NodeId> {
        v.iter().map(|&x| NodeId(x)).collect()
    }

    #[test]
    fn seven_host_tree_in_three_rounds() {
        let g = seven_host_tree();
        let f = ground_truth(&g).unwrap();
        let (r, groups) = identify_tree_groups(&f, f.overlays()).unwrap();
        // the two end groups tie for the busiest tunnel; the lower index wins
        assert_eq!(groups, vec![ids(&[1, 2]), ids(&[1, 3, 4]), ids(&[1, 5, 6, 7])]);
        let h = r.network().unwrap();
        assert_eq!(edit_distance(&g, &h, EditMode::Exact).unwrap(), 0);
    }

    #[test]
    fn two_overlays_get_one_edge() {
        let f = InterferenceMatrix::for_overlays([NodeId(1), NodeId(2)]);
        let r = identify_tree(&f, f.overlays()).unwrap();
        assert_eq!(r.edges, [(NodeId(1), NodeId(2))].into_iter().collect());
    }

    #[test]
    fn single_overlay() {
        let f = ground_truth(&seven_host_tree()).unwrap();
        let r = identify_tree(&f, &[NodeId(3)]);
        // a lone host is not a network
        assert!(matches!(r, Err(RecoveryError::NotATree { stage: TreeStage::Validation, .. })));
    }

    #[test]
    fn rings_are_rejected() {
        let f = ground_truth(&generate_minimal_ring(6, 1)).unwrap();
        let e = identify_tree(&f, f.overlays()).unwrap_err();
        assert!(matches!(e, RecoveryError::NotATree { .. }), "{e}");
    }

    #[test]
    fn subtree_of_overlays() {
        let g = seven_host_tree();
        let f = ground_truth(&g).unwrap();
        let r = identify_tree(&f, &[NodeId(5), NodeId(6), NodeId(7)]).unwrap();
        assert_eq!(r.edge_count(), 3);
        assert!(matches!(identify_tree(&f, &[NodeId(42)]), Err(RecoveryError::UnknownOverlay(_))));
    }

    #[test]
    fn star_and_double_star() {
        let g = build_network(4, 2, &[(1, 5), (2, 5), (3, 6), (4, 6), (5, 6)]).unwrap();
        let f = ground_truth(&g).unwrap();
        let h = identify_tree(&f, f.overlays()).unwrap().network().unwrap();
        assert_eq!(edit_distance(&g, &h, EditMode::Exact).unwrap(), 0);
        assert_eq!(h.parent(NodeId(1)), h.parent(NodeId(2)));
        assert_ne!(h.parent(NodeId(1)), h.parent(NodeId(3)));
    }

    proptest! {
        #[test]
        fn minimal_trees_are_recovered(leaves in 3usize..21, seed in any::<u64>()) {
            let g = generate_minimal_tree(leaves, seed);
            let f = ground_truth(&g).unwrap();
            let h = identify_tree(&f, f.overlays()).unwrap().network().unwrap();
            prop_assert_eq!(h.edge_count(), g.edge_count());
            for a in g.overlays() {
                for b in g.overlays() {
                    prop_assert_eq!(g.parent(a) == g.parent(b), h.parent(a) == h.parent(b));
                }
            }
            prop_assert_eq!(edit_distance(&g, &h, EditMode::Heuristic).unwrap(), 0);
        }

        #[test]
        fn padded_trees_give_their_minimal_form(leaves in 3usize..15, pads in 1usize..5, seed in any::<u64>()) {
            let g = pad_with_relays(&generate_minimal_tree(leaves, seed), pads, seed ^ 1);
            let f = ground_truth(&g).unwrap();
            let h = identify_tree(&f, f.overlays()).unwrap().network().unwrap();
            let m = reduce_to_minimal(&g);
            prop_assert_eq!(edit_distance(&m, &h, EditMode::Heuristic).unwrap(), 0);
        }
    }
}
