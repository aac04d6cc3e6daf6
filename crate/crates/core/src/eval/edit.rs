//! Graph edit distance counting edge insertions and deletions only.
//!
//! Both graphs are padded with isolated nodes to equal size per node kind;
//! a mapping pairs overlays with overlays and underlays with underlays. The
//! cost of a mapping is the number of node pairs adjacent in exactly one
//! graph.

use serde::{Deserialize, Serialize};

use crate::graph::{NetworkGraph, NodeId, NodeKind};

use super::EvalError;

pub const DEFAULT_EXACT_NODE_LIMIT: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditMode {
    /// Branch and bound over all mappings.
    Exact,
    /// Best of a few constructive mappings after pairwise-swap descent; an
    /// upper bound on the exact value.
    Heuristic,
}

/// Dense, padded form of a graph: overlays first (by id), then underlays.
struct Dense {
    ids: Vec<Option<NodeId>>,
    overlays: usize,
    adj: Vec<Vec<bool>>,
    deg: Vec<usize>,
}

impl Dense {
    fn new(g: &NetworkGraph, overlays: usize, underlays: usize) -> Self {
        let mut ids: Vec<Option<NodeId>> = g.overlays().map(Some).collect();
        ids.resize(overlays, None);
        ids.extend(g.underlays().map(Some));
        ids.resize(overlays + underlays, None);
        let n = ids.len();
        let pos: std::collections::HashMap<NodeId, usize> =
            ids.iter().enumerate().filter_map(|(i, id)| id.map(|id| (id, i))).collect();
        let mut adj = vec![vec![false; n]; n];
        for (a, b) in g.edges() {
            let (i, j) = (pos[&a], pos[&b]);
            adj[i][j] = true;
            adj[j][i] = true;
        }
        let deg = adj.iter().map(|r| r.iter().filter(|&&x| x).count()).collect();
        Dense {
            ids,
            overlays,
            adj,
            deg,
        }
    }

    fn len(&self) -> usize {
        self.ids.len()
    }

    fn kind(&self, i: usize) -> NodeKind {
        if i < self.overlays {
            NodeKind::Overlay
        } else {
            NodeKind::Underlay
        }
    }
}

fn pad(g1: &NetworkGraph, g2: &NetworkGraph) -> (Dense, Dense) {
    let o = g1.overlay_count().max(g2.overlay_count());
    let u = g1.underlays().count().max(g2.underlays().count());
    (Dense::new(g1, o, u), Dense::new(g2, o, u))
}

fn mapping_cost(a: &Dense, b: &Dense, map: &[usize]) -> usize {
    let n = a.len();
    let mut cost = 0;
    for i in 0..n {
        for j in i + 1..n {
            if a.adj[i][j] != b.adj[map[i]][map[j]] {
                cost += 1;
            }
        }
    }
    cost
}

pub fn edit_distance(g1: &NetworkGraph, g2: &NetworkGraph, mode: EditMode) -> Result<usize, EvalError> {
    edit_distance_with_limit(g1, g2, mode, DEFAULT_EXACT_NODE_LIMIT)
}

/// Like [`edit_distance`] with an explicit node limit for [`EditMode::Exact`].
pub fn edit_distance_with_limit(
    g1: &NetworkGraph,
    g2: &NetworkGraph,
    mode: EditMode,
    exact_limit: usize,
) -> Result<usize, EvalError> {
    let (a, b) = pad(g1, g2);
    match mode {
        EditMode::Heuristic => Ok(heuristic(&a, &b).0),
        EditMode::Exact => {
            let nodes = g1.node_count().max(g2.node_count());
            if nodes > exact_limit {
                return Err(EvalError::BudgetExceeded {
                    nodes,
                    limit: exact_limit,
                });
            }
            Ok(exact(&a, &b))
        }
    }
}

fn exact(a: &Dense, b: &Dense) -> usize {
    let n = a.len();
    let (mut best, _) = heuristic(a, b);
    if best == 0 {
        return 0;
    }
    // most constrained first: high degree within each kind
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(a.deg[i]), i));
    let mut state = Search {
        a,
        b,
        order,
        map: vec![usize::MAX; n],
        used: vec![false; n],
        assigned_a: vec![false; n],
    };
    state.rec(0, 0, &mut best);
    best
}

struct Search<'a> {
    a: &'a Dense,
    b: &'a Dense,
    order: Vec<usize>,
    map: Vec<usize>,
    used: Vec<bool>,
    assigned_a: Vec<bool>,
}

impl Search<'_> {
    /// Cost of the fixed pairs plus, for every assigned node, the gap between
    /// its edge counts towards the unassigned parts, plus the gap between the
    /// edge counts inside the unassigned parts.
    fn lower_bound(&self, cost: usize) -> usize {
        let n = self.a.len();
        let mut lb = cost;
        let (mut ea, mut eb) = (0usize, 0usize);
        for i in 0..n {
            if self.assigned_a[i] {
                let ca = (0..n).filter(|&j| !self.assigned_a[j] && self.a.adj[i][j]).count();
                let bi = self.map[i];
                let cb = (0..n).filter(|&j| !self.used[j] && self.b.adj[bi][j]).count();
                lb += ca.abs_diff(cb);
            } else {
                ea += (i + 1..n).filter(|&j| !self.assigned_a[j] && self.a.adj[i][j]).count();
            }
            if !self.used[i] {
                eb += (i + 1..n).filter(|&j| !self.used[j] && self.b.adj[i][j]).count();
            }
        }
        lb + ea.abs_diff(eb)
    }

    fn rec(&mut self, depth: usize, cost: usize, best: &mut usize) {
        if depth == self.order.len() {
            *best = (*best).min(cost);
            return;
        }
        let i = self.order[depth];
        let kind = self.a.kind(i);
        let mut cands: Vec<usize> = (0..self.b.len())
            .filter(|&j| !self.used[j] && self.b.kind(j) == kind)
            .collect();
        cands.sort_by_key(|&j| (self.a.deg[i].abs_diff(self.b.deg[j]), j));
        for j in cands {
            let added = self
                .order
                .iter()
                .take(depth)
                .filter(|&&p| self.a.adj[i][p] != self.b.adj[j][self.map[p]])
                .count();
            let c = cost + added;
            if c >= *best {
                continue;
            }
            self.map[i] = j;
            self.used[j] = true;
            self.assigned_a[i] = true;
            if self.lower_bound(c) < *best {
                self.rec(depth + 1, c, best);
            }
            self.assigned_a[i] = false;
            self.used[j] = false;
            self.map[i] = usize::MAX;
            if *best == 0 {
                return;
            }
        }
    }
}

/// Sorted neighbour degrees, used to rank structurally similar nodes.
fn profile(g: &Dense, i: usize) -> (usize, Vec<usize>) {
    let mut nd: Vec<usize> = (0..g.len()).filter(|&j| g.adj[i][j]).map(|j| g.deg[j]).collect();
    nd.sort_unstable_by(|x, y| y.cmp(x));
    (g.deg[i], nd)
}

/// Pairs nodes of equal kind by descending degree profile.
fn degree_mapping(a: &Dense, b: &Dense) -> Vec<usize> {
    let n = a.len();
    let mut map = vec![0; n];
    for (lo, hi) in [(0, a.overlays), (a.overlays, n)] {
        let mut ia: Vec<usize> = (lo..hi).collect();
        let mut ib: Vec<usize> = (lo..hi).collect();
        ia.sort_by_cached_key(|&i| (std::cmp::Reverse(profile(a, i)), i));
        ib.sort_by_cached_key(|&i| (std::cmp::Reverse(profile(b, i)), i));
        for (x, y) in ia.into_iter().zip(ib) {
            map[x] = y;
        }
    }
    map
}

/// Keeps overlays with equal ids together and grows the underlay mapping
/// outwards, pairing nodes with the most already-mapped common neighbours.
fn anchored_mapping(a: &Dense, b: &Dense) -> Vec<usize> {
    let n = a.len();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for i in 0..a.overlays {
        if let Some(j) = (0..b.overlays).find(|&j| !used[j] && a.ids[i].is_some() && b.ids[j] == a.ids[i]) {
            map[i] = j;
            used[j] = true;
        }
    }
    loop {
        let mut best: Option<(usize, usize, usize, usize)> = None; // (score, -diff) via tuple order
        for i in a.overlays..n {
            if map[i] != usize::MAX {
                continue;
            }
            for j in b.overlays..n {
                if used[j] {
                    continue;
                }
                let common = (0..n)
                    .filter(|&p| map[p] != usize::MAX && a.adj[i][p] && b.adj[j][map[p]])
                    .count();
                if common == 0 {
                    continue;
                }
                let diff = a.deg[i].abs_diff(b.deg[j]);
                let key = (common, usize::MAX - diff, usize::MAX - i, usize::MAX - j);
                if best.is_none_or(|bk| key > bk) {
                    best = Some(key);
                }
            }
        }
        let Some((_, _, i, j)) = best else { break };
        let (i, j) = (usize::MAX - i, usize::MAX - j);
        map[i] = j;
        used[j] = true;
    }
    // whatever is left (unmatched overlays, disconnected padding) by degree
    for lo_hi in [(0, a.overlays), (a.overlays, n)] {
        let mut ia: Vec<usize> = (lo_hi.0..lo_hi.1).filter(|&i| map[i] == usize::MAX).collect();
        let mut ib: Vec<usize> = (lo_hi.0..lo_hi.1).filter(|&j| !used[j]).collect();
        ia.sort_by_key(|&i| (std::cmp::Reverse(a.deg[i]), i));
        ib.sort_by_key(|&j| (std::cmp::Reverse(b.deg[j]), j));
        for (x, y) in ia.into_iter().zip(ib) {
            map[x] = y;
            used[y] = true;
        }
    }
    map
}

/// Cost change from swapping the images of `u` and `v`.
fn swap_delta(a: &Dense, b: &Dense, map: &[usize], u: usize, v: usize) -> isize {
    let (mu, mv) = (map[u], map[v]);
    let mut delta = 0isize;
    for w in 0..a.len() {
        if w == u || w == v {
            continue;
        }
        let mw = map[w];
        let before = (a.adj[u][w] != b.adj[mu][mw]) as isize + (a.adj[v][w] != b.adj[mv][mw]) as isize;
        let after = (a.adj[u][w] != b.adj[mv][mw]) as isize + (a.adj[v][w] != b.adj[mu][mw]) as isize;
        delta += after - before;
    }
    delta
}

fn descend(a: &Dense, b: &Dense, mut map: Vec<usize>) -> (usize, Vec<usize>) {
    let n = a.len();
    let mut cost = mapping_cost(a, b, &map);
    let mut improved = true;
    while improved && cost > 0 {
        improved = false;
        for u in 0..n {
            for v in u + 1..n {
                if a.kind(u) != a.kind(v) {
                    continue;
                }
                let d = swap_delta(a, b, &map, u, v);
                if d < 0 {
                    map.swap(u, v);
                    cost = (cost as isize + d) as usize;
                    improved = true;
                }
            }
        }
    }
    (cost, map)
}

fn heuristic(a: &Dense, b: &Dense) -> (usize, Vec<usize>) {
    let first = descend(a, b, anchored_mapping(a, b));
    if first.0 == 0 {
        return first;
    }
    let second = descend(a, b, degree_mapping(a, b));
    if second.0 < first.0 {
        second
    } else {
        first
    }
}
