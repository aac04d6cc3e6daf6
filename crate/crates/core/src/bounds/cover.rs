//! Edge clique covers of interference graphs.
//!
//! The exact solver only ever branches over *maximal* cliques: any cover can
//! be turned into one of the same size whose cliques are maximal. Lower
//! bounds come from sets of edges no two of which fit in a common clique;
//! each such edge needs a clique of its own.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::interference::InterferenceGraph;

use super::BoundsError;

/// Edge budget above which the exact search refuses to branch.
pub const DEFAULT_EXACT_EDGE_BUDGET: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoverMode {
    Exact,
    Greedy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueCover {
    pub cliques: Vec<Vec<usize>>,
    pub size: usize,
    /// Whether `size` is certified minimum.
    pub exact: bool,
}

impl CliqueCover {
    fn new(mut cliques: Vec<Vec<usize>>, exact: bool) -> Self {
        for c in cliques.iter_mut() {
            c.sort_unstable();
        }
        cliques.sort();
        CliqueCover {
            size: cliques.len(),
            cliques,
            exact,
        }
    }

    /// Checks that every set is a clique of `g` and every edge is covered.
    pub fn is_valid_for(&self, g: &InterferenceGraph) -> bool {
        let cliques_ok = self.cliques.iter().all(|c| {
            c.iter()
                .enumerate()
                .all(|(i, &a)| c[i + 1..].iter().all(|&b| g.has_edge(a, b)))
        });
        cliques_ok
            && self.size == self.cliques.len()
            && g.edges().all(|(a, b)| {
                self.cliques
                    .iter()
                    .any(|c| c.contains(&a) && c.contains(&b))
            })
    }
}

struct Prepared {
    edges: Vec<(usize, usize)>,
    /// Maximal cliques with at least one edge.
    cliques: Vec<Vec<usize>>,
    /// Edges covered by each clique.
    clique_edges: Vec<BitSet>,
    /// For each edge, the cliques containing it.
    edge_cliques: Vec<Vec<usize>>,
    /// For each edge, the edges sharing a clique with it (itself included).
    compatible: Vec<BitSet>,
}

fn adjacency(g: &InterferenceGraph) -> Vec<BitSet> {
    let n = g.vertex_count();
    (0..n)
        .map(|v| {
            let mut b = BitSet::new(n);
            for &u in g.neighbors(v) {
                b.insert(u);
            }
            b
        })
        .collect()
}

/// Bron–Kerbosch with Tomita pivoting.
fn maximal_cliques(adj: &[BitSet]) -> Vec<Vec<usize>> {
    fn rec(adj: &[BitSet], r: &mut Vec<usize>, mut p: BitSet, mut x: BitSet, out: &mut Vec<Vec<usize>>) {
        if p.is_empty() {
            if x.is_empty() {
                out.push(r.clone());
            }
            return;
        }
        let pivot = p
            .iter()
            .chain(x.iter())
            .max_by_key(|&u| (p.intersection_count(&adj[u]), std::cmp::Reverse(u)))
            .expect("p is non-empty");
        let candidates: Vec<usize> = p.iter().filter(|&v| !adj[pivot].contains(v)).collect();
        for v in candidates {
            let mut np = p.clone();
            np.intersect_with(&adj[v]);
            let mut nx = x.clone();
            nx.intersect_with(&adj[v]);
            r.push(v);
            rec(adj, r, np, nx, out);
            r.pop();
            p.remove(v);
            x.insert(v);
        }
    }
    let n = adj.len();
    let mut out = Vec::new();
    rec(adj, &mut Vec::new(), BitSet::full(n), BitSet::new(n), &mut out);
    out.retain(|c| c.len() >= 2);
    for c in out.iter_mut() {
        c.sort_unstable();
    }
    out.sort();
    out
}

fn prepare(g: &InterferenceGraph) -> Prepared {
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let m = edges.len();
    let index = |a: usize, b: usize| -> usize {
        edges
            .binary_search(&(a.min(b), a.max(b)))
            .expect("clique pairs are edges")
    };
    let cliques = maximal_cliques(&adjacency(g));
    let mut clique_edges = Vec::with_capacity(cliques.len());
    let mut edge_cliques = vec![Vec::new(); m];
    for (ci, c) in cliques.iter().enumerate() {
        let mut b = BitSet::new(m);
        for (i, &u) in c.iter().enumerate() {
            for &v in &c[i + 1..] {
                let e = index(u, v);
                b.insert(e);
                edge_cliques[e].push(ci);
            }
        }
        clique_edges.push(b);
    }
    let compatible = edge_cliques
        .iter()
        .map(|cs| {
            let mut b = BitSet::new(m);
            for &c in cs {
                b.union_with(&clique_edges[c]);
            }
            b
        })
        .collect();
    Prepared {
        edges,
        cliques,
        clique_edges,
        edge_cliques,
        compatible,
    }
}

/// Greedy set of uncovered edges that pairwise share no clique, scanning
/// edges in `order`.
fn independent_edges(p: &Prepared, uncovered: &BitSet, order: &[usize]) -> usize {
    let mut blocked = BitSet::new(p.edges.len());
    let mut count = 0;
    for &e in order {
        if uncovered.contains(e) && !blocked.contains(e) {
            count += 1;
            blocked.union_with(&p.compatible[e]);
        }
    }
    count
}

/// Edges in the fewest cliques first: they are the hardest to share.
fn edge_order(p: &Prepared) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p.edges.len()).collect();
    order.sort_by_key(|&e| (p.compatible[e].count(), p.edge_cliques[e].len(), e));
    order
}

/// Drops cliques whose edges are all covered by other cliques, one at a
/// time, until every clique owns at least one edge.
fn prune_redundant(p: &Prepared, chosen: &mut Vec<usize>) {
    loop {
        let m = p.edges.len();
        let mut counts = vec![0u32; m];
        for &c in chosen.iter() {
            for e in p.clique_edges[c].iter() {
                counts[e] += 1;
            }
        }
        let redundant = chosen
            .iter()
            .position(|&c| p.clique_edges[c].iter().all(|e| counts[e] > 1));
        match redundant {
            Some(i) => {
                chosen.remove(i);
            }
            None => return,
        }
    }
}

fn greedy_choice(p: &Prepared, order: &[usize]) -> Vec<usize> {
    let m = p.edges.len();
    let mut uncovered = BitSet::full(m);
    let mut chosen = Vec::new();
    for &e in order {
        if !uncovered.contains(e) {
            continue;
        }
        let best = p.edge_cliques[e]
            .iter()
            .copied()
            .max_by_key(|&c| (p.clique_edges[c].intersection_count(&uncovered), std::cmp::Reverse(c)))
            .expect("every edge lies in a maximal clique");
        uncovered.difference_with(&p.clique_edges[best]);
        chosen.push(best);
    }
    prune_redundant(p, &mut chosen);
    chosen
}

struct Search<'a> {
    p: &'a Prepared,
    order: Vec<usize>,
    best: Vec<usize>,
    lower: usize,
}

impl Search<'_> {
    fn run(&mut self, uncovered: &mut BitSet, chosen: &mut Vec<usize>) {
        if self.best.len() == self.lower {
            return;
        }
        if uncovered.is_empty() {
            if chosen.len() < self.best.len() {
                self.best = chosen.clone();
            }
            return;
        }
        let lb = independent_edges(self.p, uncovered, &self.order);
        if chosen.len() + lb >= self.best.len() {
            return;
        }
        // branch on the uncovered edge with the fewest clique options
        let e = uncovered
            .iter()
            .min_by_key(|&e| (self.p.edge_cliques[e].len(), e))
            .expect("non-empty");
        let mut options = self.p.edge_cliques[e].clone();
        options.sort_by_key(|&c| std::cmp::Reverse(self.p.clique_edges[c].intersection_count(uncovered)));
        for c in options {
            let mut next = uncovered.clone();
            next.difference_with(&self.p.clique_edges[c]);
            chosen.push(c);
            self.run(&mut next, chosen);
            chosen.pop();
        }
    }
}

/// Minimum edge clique cover with the default exact budget.
pub fn min_edge_clique_cover(g: &InterferenceGraph, mode: CoverMode) -> Result<CliqueCover, BoundsError> {
    min_edge_clique_cover_with_budget(g, mode, DEFAULT_EXACT_EDGE_BUDGET)
}

/// In exact mode the budget only applies when the greedy cover and the
/// independent-edge bound disagree and a search is actually needed.
pub fn min_edge_clique_cover_with_budget(
    g: &InterferenceGraph,
    mode: CoverMode,
    edge_budget: usize,
) -> Result<CliqueCover, BoundsError> {
    if g.edge_count() == 0 {
        return Ok(CliqueCover::new(Vec::new(), true));
    }
    if mode == CoverMode::Greedy {
        let cliques = grow_cover(g);
        let exact = cliques.len() == independent_edge_bound(g);
        return Ok(CliqueCover::new(cliques, exact));
    }
    let p = prepare(g);
    let m = p.edges.len();
    let order = edge_order(&p);
    let greedy = greedy_choice(&p, &order);
    let lower = independent_edges(&p, &BitSet::full(m), &order);
    let to_cover = |ids: &[usize]| ids.iter().map(|&c| p.cliques[c].clone()).collect::<Vec<_>>();
    if greedy.len() == lower {
        return Ok(CliqueCover::new(to_cover(&greedy), true));
    }
    if m > edge_budget {
        return Err(BoundsError::BudgetExceeded {
            edges: m,
            budget: edge_budget,
        });
    }
    let mut search = Search {
        p: &p,
        order,
        best: greedy,
        lower,
    };
    search.run(&mut BitSet::full(m), &mut Vec::new());
    let mut best = search.best;
    prune_redundant(&p, &mut best);
    Ok(CliqueCover::new(to_cover(&best), true))
}

/// Edges ordered by ascending endpoint degree sum.
fn low_degree_edges(g: &InterferenceGraph) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = g.edges().collect();
    edges.sort_by_key(|&(a, b)| (g.degree(a) + g.degree(b), a, b));
    edges
}

/// Takes uncovered edges one by one and grows each into a maximal clique,
/// preferring vertices that cover the most still-uncovered edges. Works
/// without enumerating cliques, so it scales to large graphs.
fn grow_cover(g: &InterferenceGraph) -> Vec<Vec<usize>> {
    let adj = adjacency(g);
    let mut uncovered = adj.clone();
    let mut cliques = Vec::new();
    for (u, v) in low_degree_edges(g) {
        if !uncovered[u].contains(v) {
            continue;
        }
        let mut clique = vec![u, v];
        let mut cand = adj[u].clone();
        cand.intersect_with(&adj[v]);
        while !cand.is_empty() {
            let w = cand
                .iter()
                .max_by_key(|&w| {
                    let gain = clique.iter().filter(|&&q| uncovered[q].contains(w)).count();
                    (gain, std::cmp::Reverse(w))
                })
                .expect("non-empty");
            clique.push(w);
            cand.intersect_with(&adj[w]);
        }
        for (i, &a) in clique.iter().enumerate() {
            for &b in &clique[i + 1..] {
                uncovered[a].remove(b);
                uncovered[b].remove(a);
            }
        }
        cliques.push(clique);
    }
    // Drop cliques that own no edge. One pass suffices: removing a clique
    // never takes ownership away from one already kept.
    let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
    let pairs = |c: &[usize]| -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, &a) in c.iter().enumerate() {
            for &b in &c[i + 1..] {
                out.push((a.min(b), a.max(b)));
            }
        }
        out
    };
    for c in &cliques {
        for e in pairs(c) {
            *counts.entry(e).or_default() += 1;
        }
    }
    cliques.retain(|c| {
        let es = pairs(c);
        if es.iter().all(|e| counts[e] > 1) {
            for e in &es {
                *counts.get_mut(e).expect("counted") -= 1;
            }
            false
        } else {
            true
        }
    });
    cliques
}

/// A number no edge clique cover of `g` can beat: the size of a greedy set
/// of edges that pairwise share no clique (two edges share one exactly when
/// their endpoints are pairwise adjacent).
pub fn independent_edge_bound(g: &InterferenceGraph) -> usize {
    let adj = adjacency(g);
    let linked = |a: usize, b: usize| a == b || adj[a].contains(b);
    let mut picked: Vec<(usize, usize)> = Vec::new();
    for (a, b) in low_degree_edges(g) {
        let compatible = |&(c, d): &(usize, usize)| linked(a, c) && linked(a, d) && linked(b, c) && linked(b, d);
        if !picked.iter().any(compatible) {
            picked.push((a, b));
        }
    }
    picked.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Smallest number of cliques covering all edges, by trying every
    /// combination of maximal cliques found by subset enumeration.
    fn brute_force_cover(g: &InterferenceGraph) -> usize {
        let n = g.vertex_count();
        let edges: Vec<(usize, usize)> = g.edges().collect();
        if edges.is_empty() {
            return 0;
        }
        let is_clique = |mask: u32| {
            (0..n).all(|a| {
                (a + 1..n).all(|b| mask & (1 << a) == 0 || mask & (1 << b) == 0 || g.has_edge(a, b))
            })
        };
        let cliques: Vec<u32> = (1u32..1 << n).filter(|&m| is_clique(m)).collect();
        let maximal: Vec<u32> = cliques
            .iter()
            .copied()
            .filter(|&c| c.count_ones() >= 2 && !cliques.iter().any(|&d| d != c && d & c == c))
            .collect();
        fn choose(
            maximal: &[u32],
            edges: &[(usize, usize)],
            start: usize,
            left: usize,
            chosen: &mut Vec<u32>,
        ) -> bool {
            if left == 0 {
                return edges.iter().all(|&(a, b)| {
                    chosen.iter().any(|&c| c & (1 << a) != 0 && c & (1 << b) != 0)
                });
            }
            for i in start..maximal.len() {
                chosen.push(maximal[i]);
                let found = choose(maximal, edges, i + 1, left - 1, chosen);
                chosen.pop();
                if found {
                    return true;
                }
            }
            false
        }
        for size in 1..=maximal.len() {
            if choose(&maximal, &edges, 0, size, &mut Vec::new()) {
                return size;
            }
        }
        unreachable!("the maximal cliques always cover every edge")
    }

    #[test]
    fn small_examples() {
        let path = InterferenceGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        let c = min_edge_clique_cover(&path, CoverMode::Exact).unwrap();
        assert_eq!(c.size, 3);
        assert!(c.exact && c.is_valid_for(&path));
        assert_eq!(brute_force_cover(&path), 3);

        let tri = InterferenceGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(min_edge_clique_cover(&tri, CoverMode::Exact).unwrap().size, 1);

        let empty = InterferenceGraph::from_edges(5, &[]);
        assert_eq!(min_edge_clique_cover(&empty, CoverMode::Exact).unwrap().size, 0);
    }

    #[test]
    fn budget_only_applies_to_search() {
        // a long path is certified by the bound alone
        let edges: Vec<(usize, usize)> = (0..60).map(|i| (i, i + 1)).collect();
        let g = InterferenceGraph::from_edges(61, &edges);
        let c = min_edge_clique_cover_with_budget(&g, CoverMode::Exact, 5).unwrap();
        assert_eq!(c.size, 60);
        assert!(c.exact);
    }

    #[test]
    fn every_clique_owns_an_edge() {
        // two triangles sharing a vertex plus a pendant edge
        let g = InterferenceGraph::from_edges(
            6,
            &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4), (4, 5)],
        );
        let c = min_edge_clique_cover(&g, CoverMode::Exact).unwrap();
        assert_eq!(c.size, 3);
        for (i, q) in c.cliques.iter().enumerate() {
            let owns = q.iter().enumerate().any(|(x, &a)| {
                q[x + 1..].iter().any(|&b| {
                    c.cliques
                        .iter()
                        .enumerate()
                        .all(|(j, r)| j == i || !(r.contains(&a) && r.contains(&b)))
                })
            });
            assert!(owns);
        }
    }

    fn arb_graph() -> impl Strategy<Value = InterferenceGraph> {
        (2usize..=8).prop_flat_map(|n| {
            let all: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
            proptest::sample::subsequence(all.clone(), 0..=all.len().min(14))
                .prop_map(move |es| InterferenceGraph::from_edges(n, &es))
        })
    }

    proptest! {
        #[test]
        fn exact_matches_brute_force(g in arb_graph()) {
            let c = min_edge_clique_cover(&g, CoverMode::Exact).unwrap();
            prop_assert!(c.exact);
            prop_assert!(c.is_valid_for(&g));
            prop_assert_eq!(c.size, brute_force_cover(&g));
            let greedy = min_edge_clique_cover(&g, CoverMode::Greedy).unwrap();
            prop_assert!(greedy.is_valid_for(&g));
            prop_assert!(greedy.size >= c.size);
            prop_assert!(independent_edge_bound(&g) <= c.size);
        }
    }
}
