//! Exact optimisation for toy instances.
//!
//! Candidate networks are enumerated in order of increasing edge count: each
//! overlay hangs off one of `m` underlay nodes (parents assigned up to
//! relabelling) and the underlay nodes are joined by a connected edge subset.
//! For each candidate, tunnels are routed over arbitrary simple paths by
//! backtracking, pruning any assignment where two tunnels share a directed
//! link exactly when the matrix says they must not (and vice versa). The
//! first candidate that admits a routing is optimal.

use std::time::{Duration, Instant};

use crate::bounds::{feasible_graph, lower_bound, CoverMode, RecoveredGraph};
use crate::graph::NodeId;
use crate::interference::InterferenceMatrix;

use super::{IlpError, IlpModel};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveLimits {
    pub max_nodes: usize,
    pub max_tunnels: usize,
    pub time_budget: Duration,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits {
            max_nodes: 8,
            max_tunnels: 12,
            time_budget: Duration::from_secs(30),
        }
    }
}

struct Clock {
    start: Instant,
    budget: Duration,
    ticks: u32,
}

impl Clock {
    fn expired(&mut self) -> bool {
        self.ticks = self.ticks.wrapping_add(1);
        self.ticks.is_multiple_of(256) && self.start.elapsed() > self.budget
    }
}

/// Candidate network on local node numbers: overlays `0..k`, underlays
/// `k..k+m`.
struct Candidate {
    k: usize,
    m: usize,
    parent: Vec<usize>,
    under_edges: Vec<(usize, usize)>,
}

impl Candidate {
    fn arc_index(&self) -> impl Fn(usize, usize) -> u32 + '_ {
        // dense numbering of directed links: overlays' access links first
        move |a, b| {
            let n = self.k + self.m;
            (a * n + b) as u32
        }
    }

    fn under_adj(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.m];
        for &(a, b) in &self.under_edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for row in adj.iter_mut() {
            row.sort_unstable();
        }
        adj
    }
}

fn connected(m: usize, edges: &[(usize, usize)]) -> bool {
    let mut comp: Vec<usize> = (0..m).collect();
    fn find(c: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while c[r] != r {
            r = c[r];
        }
        c[x] = r;
        r
    }
    let mut parts = m;
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut comp, a), find(&mut comp, b));
        if ra != rb {
            comp[ra] = rb;
            parts -= 1;
        }
    }
    parts == 1
}

/// All simple underlay paths from `s` to `d`.
fn simple_paths(adj: &[Vec<usize>], s: usize, d: usize) -> Vec<Vec<usize>> {
    fn rec(adj: &[Vec<usize>], d: usize, path: &mut Vec<usize>, on: &mut [bool], out: &mut Vec<Vec<usize>>) {
        let cur = *path.last().expect("non-empty");
        if cur == d {
            out.push(path.clone());
            return;
        }
        for &n in &adj[cur] {
            if !on[n] {
                on[n] = true;
                path.push(n);
                rec(adj, d, path, on, out);
                path.pop();
                on[n] = false;
            }
        }
    }
    let mut on = vec![false; adj.len()];
    on[s] = true;
    let mut out = Vec::new();
    rec(adj, d, &mut vec![s], &mut on, &mut out);
    out
}

type Mask = u128;

fn route(
    f: &InterferenceMatrix,
    cand: &Candidate,
    clock: &mut Clock,
) -> Result<Option<Vec<Vec<usize>>>, ()> {
    let adj = cand.under_adj();
    let arc = cand.arc_index();
    let k = cand.k;
    let n = f.len();
    // per tunnel: candidate full paths with their link masks
    let mut options: Vec<Vec<(Vec<usize>, Mask)>> = Vec::with_capacity(n);
    for t in 0..n {
        let (s, d) = f.index().pair(t);
        let s = f.index().rank(s).expect("overlay");
        let d = f.index().rank(d).expect("overlay");
        let mut opts = Vec::new();
        for p in simple_paths(&adj, cand.parent[s], cand.parent[d]) {
            let mut full = vec![s];
            full.extend(p.iter().map(|&u| k + u));
            full.push(d);
            let mut mask: Mask = 0;
            for w in full.windows(2) {
                mask |= 1 << arc(w[0], w[1]);
            }
            opts.push((full, mask));
        }
        if opts.is_empty() {
            return Ok(None);
        }
        options.push(opts);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&t| (options[t].len(), t));

    fn rec(
        f: &InterferenceMatrix,
        options: &[Vec<(Vec<usize>, Mask)>],
        order: &[usize],
        depth: usize,
        chosen: &mut Vec<Option<usize>>,
        clock: &mut Clock,
    ) -> Result<bool, ()> {
        if clock.expired() {
            return Err(());
        }
        if depth == order.len() {
            return Ok(true);
        }
        let t = order[depth];
        'opt: for (i, (_, mask)) in options[t].iter().enumerate() {
            for &u in &order[..depth] {
                let other = options[u][chosen[u].expect("assigned")].1;
                if (mask & other != 0) != f.get(t, u) {
                    continue 'opt;
                }
            }
            chosen[t] = Some(i);
            if rec(f, options, order, depth + 1, chosen, clock)? {
                return Ok(true);
            }
        }
        chosen[t] = None;
        Ok(false)
    }

    let mut chosen = vec![None; n];
    if rec(f, &options, &order, 0, &mut chosen, clock)? {
        Ok(Some(
            (0..n)
                .map(|t| options[t][chosen[t].expect("assigned")].0.clone())
                .collect(),
        ))
    } else {
        Ok(None)
    }
}

/// Parent assignments up to relabelling of underlay nodes (restricted
/// growth strings with at most `m` blocks).
fn parent_assignments(k: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, m: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        let limit = if cur.is_empty() { 0 } else { (max + 1).min(m - 1) };
        for p in 0..=limit {
            cur.push(p);
            rec(k, m, cur, max.max(p), out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, m, &mut Vec::new(), 0, &mut out);
    out
}

fn combinations(items: usize, size: usize, mut visit: impl FnMut(&[usize]) -> bool) -> bool {
    fn rec(items: usize, size: usize, start: usize, cur: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if cur.len() == size {
            return visit(cur);
        }
        for i in start..items {
            if items - i < size - cur.len() {
                break;
            }
            cur.push(i);
            if rec(items, size, i + 1, cur, visit) {
                return true;
            }
            cur.pop();
        }
        false
    }
    rec(items, size, 0, &mut Vec::new(), &mut visit)
}

fn to_recovered(model: &IlpModel, cand: &Candidate, paths: Vec<Vec<usize>>) -> RecoveredGraph {
    let k = cand.k;
    // local node -> model node (1-based): overlays keep rank order,
    // underlays follow
    let id = |v: usize| model.node_id(v + 1);
    let mut edges = Vec::new();
    for o in 0..k {
        edges.push((id(o), id(k + cand.parent[o])));
    }
    for &(a, b) in &cand.under_edges {
        edges.push((id(k + a), id(k + b)));
    }
    let paths = paths
        .into_iter()
        .map(|p| p.into_iter().map(id).collect::<Vec<NodeId>>())
        .collect();
    RecoveredGraph::new(model.matrix.overlays().to_vec(), edges, paths)
}

/// Smallest network (by edge count) with at most `model.node_budget` nodes
/// whose tunnels can be routed to produce the model's interference matrix.
///
/// Overlays always attach to underlay nodes, so with two overlays the
/// answer is the two-edge chain rather than a direct overlay-to-overlay link.
/// On timeout the error carries [`feasible_graph`]'s network, which is
/// feasible but typically much larger and not bound by the node budget.
pub fn solve_exact_small(model: &IlpModel, limits: &SolveLimits) -> Result<RecoveredGraph, IlpError> {
    let f = &model.matrix;
    let k = f.overlays().len();
    if model.node_budget > limits.max_nodes {
        return Err(IlpError::LimitsExceeded(format!(
            "{} nodes > {}",
            model.node_budget, limits.max_nodes
        )));
    }
    if f.len() > limits.max_tunnels {
        return Err(IlpError::LimitsExceeded(format!(
            "{} tunnels > {}",
            f.len(),
            limits.max_tunnels
        )));
    }
    let infeasible = IlpError::Infeasible {
        node_budget: model.node_budget,
    };
    // tunnels with a common endpoint share its access link
    for a in 0..f.len() {
        for b in a + 1..f.len() {
            let (pa, pb) = (f.index().pair(a), f.index().pair(b));
            if (pa.0 == pb.0 || pa.1 == pb.1) && !f.get(a, b) {
                return Err(infeasible);
            }
        }
    }
    let mut clock = Clock {
        start: Instant::now(),
        budget: limits.time_budget,
        ticks: 0,
    };
    let timeout = || IlpError::TimeBudgetExceeded {
        incumbent: Box::new(Some(feasible_graph(f))),
    };
    let max_under = model.node_budget - k;
    let lb = lower_bound(f, CoverMode::Greedy).unwrap_or(0);
    let max_pairs = max_under * (max_under - 1) / 2;
    for s in 0..=max_pairs {
        if k + s < lb {
            continue;
        }
        for m in 1..=max_under {
            if s + 1 < m || s > m * (m - 1) / 2 {
                continue;
            }
            let pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))).collect();
            for parent in parent_assignments(k, m) {
                let mut found: Option<Result<RecoveredGraph, ()>> = None;
                combinations(pairs.len(), s, |pick| {
                    let under_edges: Vec<(usize, usize)> = pick.iter().map(|&i| pairs[i]).collect();
                    if !connected(m, &under_edges) {
                        return false;
                    }
                    let cand = Candidate {
                        k,
                        m,
                        parent: parent.clone(),
                        under_edges,
                    };
                    match route(f, &cand, &mut clock) {
                        Ok(Some(paths)) => {
                            found = Some(Ok(to_recovered(model, &cand, paths)));
                            true
                        }
                        Ok(None) => false,
                        Err(()) => {
                            found = Some(Err(()));
                            true
                        }
                    }
                });
                match found {
                    Some(Ok(g)) => return Ok(g),
                    Some(Err(())) => return Err(timeout()),
                    None => {}
                }
                if clock.start.elapsed() > clock.budget {
                    return Err(timeout());
                }
            }
        }
    }
    Err(infeasible)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::verify_solution;
    use crate::graph::build_network;
    use crate::ilp::build_ilp_model;
    use crate::interference::ground_truth;

    fn solve(g: &crate::graph::NetworkGraph, budget: usize) -> (RecoveredGraph, InterferenceMatrix) {
        let f = ground_truth(g).unwrap();
        let m = build_ilp_model(&f, budget).unwrap();
        (solve_exact_small(&m, &SolveLimits::default()).unwrap(), f)
    }

    #[test]
    fn restricted_growth_strings() {
        assert_eq!(parent_assignments(3, 3).len(), 5);
        assert_eq!(parent_assignments(3, 2).len(), 4);
        assert_eq!(parent_assignments(4, 4).len(), 15);
    }

    #[test]
    fn star_needs_three_edges() {
        let g = build_network(3, 1, &[(1, 4), (2, 4), (3, 4)]).unwrap();
        let (r, f) = solve(&g, 4);
        assert_eq!(r.edge_count(), 3);
        assert!(verify_solution(&f, &r).unwrap().feasible());
    }

    #[test]
    fn two_overlays_give_the_chain() {
        let g = build_network(2, 3, &[(1, 3), (3, 4), (4, 5), (5, 2)]).unwrap();
        let (r, f) = solve(&g, 4);
        assert_eq!(r.edge_count(), 2);
        assert!(verify_solution(&f, &r).unwrap().feasible());
        assert!(r.network().is_ok());
    }

    #[test]
    fn two_hub_tree() {
        let g = build_network(4, 2, &[(1, 5), (2, 5), (3, 6), (4, 6), (5, 6)]).unwrap();
        let (r, f) = solve(&g, 6);
        assert_eq!(r.edge_count(), 5);
        assert!(verify_solution(&f, &r).unwrap().feasible());
    }

    #[test]
    fn inconsistent_matrix_is_infeasible() {
        let f = InterferenceMatrix::for_overlays([NodeId(1), NodeId(2), NodeId(3)]);
        let m = build_ilp_model(&f, 5).unwrap();
        assert!(matches!(
            solve_exact_small(&m, &SolveLimits::default()),
            Err(IlpError::Infeasible { .. })
        ));
    }

    #[test]
    fn limits() {
        let f = ground_truth(&crate::graph::grid_network()).unwrap();
        let m = build_ilp_model(&f, 12).unwrap();
        assert!(matches!(
            solve_exact_small(&m, &SolveLimits::default()),
            Err(IlpError::LimitsExceeded(_))
        ));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(40))]
        #[test]
        fn optimum_is_sandwiched(seed in 0u64..10_000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let k = rng.random_range(2..5u32);
            let m = rng.random_range(1..4u32);
            let mut edges: Vec<(u32, u32)> =
                (1..m).map(|i| (k + 1 + rng.random_range(0..i), k + 1 + i)).collect();
            if m == 3 && rng.random_bool(0.5) {
                edges.push((k + 1, k + 3));
            }
            for o in 1..=k {
                edges.push((o, k + 1 + rng.random_range(0..m)));
            }
            edges.sort();
            edges.dedup();
            let g = build_network(k as usize, m as usize, &edges).unwrap();
            let f = ground_truth(&g).unwrap();
            let model = build_ilp_model(&f, (k + m) as usize).unwrap();
            let r = solve_exact_small(&model, &SolveLimits::default()).unwrap();
            proptest::prop_assert!(verify_solution(&f, &r).unwrap().feasible());
            proptest::prop_assert!(r.edge_count() <= g.edge_count());
            proptest::prop_assert!(lower_bound(&f, CoverMode::Exact).unwrap() <= r.edge_count());
        }
    }
}
