//! Bounds on the number of links of the smallest network consistent with an
//! interference matrix, and checks of candidate solutions.

mod cover;
mod feasible;
mod verify;

use thiserror::Error;

use crate::interference::{build_interference_graph, InterferenceMatrix};

pub use cover::{
    independent_edge_bound, min_edge_clique_cover, min_edge_clique_cover_with_budget, CliqueCover,
    CoverMode, DEFAULT_EXACT_EDGE_BUDGET,
};
pub use feasible::{feasible_graph, LineLayout};
pub use verify::{
    check_unique_intersection_condition, verify_solution, Constraint, RecoveredGraph,
    UniqueIntersection, Verification, Violation,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BoundsError {
    #[error("exact clique cover needs a search over {edges} edges, budget is {budget}")]
    BudgetExceeded { edges: usize, budget: usize },
    #[error("candidate does not match the matrix: {0}")]
    IndexMismatch(String),
}

/// Link count of the network built by [`feasible_graph`] in the worst case:
/// `|E_F| + 2·L·|E_F| + |O| + 2·L`.
pub fn upper_bound(f: &InterferenceMatrix) -> usize {
    let e = f.interfering_pair_count();
    let l = f.len();
    e + 2 * l * e + f.overlays().len() + 2 * l
}

/// Every link carries at most two cliques of the interference graph (one per
/// direction), so a network needs at least `ceil(C / 2)` links.
///
/// In greedy mode `C` is replaced by the independent-edge bound, which is
/// never larger than the true cover size.
pub fn lower_bound(f: &InterferenceMatrix, mode: CoverMode) -> Result<usize, BoundsError> {
    lower_bound_with_budget(f, mode, DEFAULT_EXACT_EDGE_BUDGET)
}

pub fn lower_bound_with_budget(
    f: &InterferenceMatrix,
    mode: CoverMode,
    edge_budget: usize,
) -> Result<usize, BoundsError> {
    let gf = build_interference_graph(f);
    let c = match mode {
        CoverMode::Exact => min_edge_clique_cover_with_budget(&gf, mode, edge_budget)?.size,
        CoverMode::Greedy => independent_edge_bound(&gf),
    };
    Ok(c.div_ceil(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NodeId;

    #[test]
    fn upper_bound_formula() {
        let f = InterferenceMatrix::for_overlays([NodeId(1), NodeId(2)]);
        assert_eq!(upper_bound(&f), 6);
        let mut f = InterferenceMatrix::for_overlays((1..=4).map(NodeId));
        f.set(0, 1, true);
        f.set(0, 2, true);
        f.set(5, 7, true);
        assert_eq!(upper_bound(&f), 3 + 72 + 4 + 24);
    }

    #[test]
    fn lower_bound_rounds_up() {
        let mut f = InterferenceMatrix::for_overlays((1..=4).map(NodeId));
        assert_eq!(lower_bound(&f, CoverMode::Exact).unwrap(), 0);
        // a path a-b-c-d in the interference graph
        f.set(0, 1, true);
        f.set(1, 2, true);
        f.set(2, 3, true);
        assert_eq!(lower_bound(&f, CoverMode::Exact).unwrap(), 2);
        assert_eq!(lower_bound(&f, CoverMode::Greedy).unwrap(), 2);
    }
}
