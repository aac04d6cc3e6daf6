//! Ring and multi-ring recovery: every overlay gets its own router, and
//! routers are joined along the tunnels that interfere least.

use std::collections::{BTreeMap, BTreeSet};

use crate::bounds::RecoveredGraph;
use crate::graph::{NetworkGraph, NodeId, NodeKind};
use crate::interference::{ground_truth, InterferenceMatrix};

use super::{restrict, Reconstruction, RecoveryError};

/// Router assigned to the overlay of rank `r`: ids continue after the
/// largest overlay id, in overlay order.
fn router_of(f: &InterferenceMatrix, o: NodeId) -> NodeId {
    let base = f.overlays().last().map_or(0, |m| m.0);
    NodeId(base + 1 + f.index().rank(o).expect("overlay of f") as u32)
}

/// Destinations of the tunnels from `i`, least interfering first (ties by
/// destination id).
fn quietest_destinations(f: &InterferenceMatrix, i: NodeId) -> Vec<NodeId> {
    let mut out: Vec<(usize, NodeId)> = f
        .overlays()
        .iter()
        .filter(|&&d| d != i)
        .map(|&d| {
            let k = f.index().index(i, d).expect("both overlays");
            (f.interference_count(k), d)
        })
        .collect();
    out.sort();
    out.into_iter().map(|(_, d)| d).collect()
}

/// Places each overlay's router between the routers of the two overlays
/// reached by its least-interfering tunnels, then checks that the result
/// is a single cycle reproducing `f`.
pub fn identify_ring(f: &InterferenceMatrix, overlays: &[NodeId]) -> Result<RecoveredGraph, RecoveryError> {
    let f = restrict(f, overlays)?;
    let k = f.overlays().len();
    if k < 5 {
        return Err(RecoveryError::TooFewOverlays(k));
    }
    let mut adj: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
    for &i in f.overlays() {
        for d in quietest_destinations(&f, i).into_iter().take(2) {
            adj.entry(i).or_default().insert(d);
            adj.entry(d).or_default().insert(i);
        }
    }
    let cycle = cyclic_order(&adj, f.overlays()).ok_or_else(|| {
        RecoveryError::NotARing("routers do not form a single cycle with one host each".into())
    })?;
    let edges = ring_edges(&f, &cycle);
    let r = RecoveredGraph::new(f.overlays().to_vec(), edges, Vec::new());
    let g = r
        .network()
        .map_err(|e| RecoveryError::NotARing(format!("rebuilt graph is not a network: {e}")))?;
    if !is_hosted_cycle(&g) {
        return Err(RecoveryError::NotARing(
            "routers do not form a single cycle with one host each".into(),
        ));
    }
    let fg = ground_truth(&g).map_err(|e| RecoveryError::NotARing(e.to_string()))?;
    let d = fg.hamming_distance(&f);
    if d != 0 {
        return Err(RecoveryError::NotARing(format!("rebuilt ring disagrees on {d} tunnel pairs")));
    }
    RecoveredGraph::from_network(&g).map_err(|e| RecoveryError::NotARing(e.to_string()))
}

/// The overlays in cyclic order when `adj` (overlay-level adjacency) is a
/// single cycle through all of them.
fn cyclic_order(adj: &BTreeMap<NodeId, BTreeSet<NodeId>>, overlays: &[NodeId]) -> Option<Vec<NodeId>> {
    if overlays.len() < 3 || overlays.iter().any(|o| adj.get(o).is_none_or(|n| n.len() != 2)) {
        return None;
    }
    let start = overlays[0];
    let mut order = vec![start];
    let mut prev = start;
    let mut cur = *adj[&start].first().expect("two neighbours");
    while cur != start {
        if order.len() == overlays.len() {
            return None;
        }
        order.push(cur);
        let next = *adj[&cur].iter().find(|&&n| n != prev)?;
        prev = cur;
        cur = next;
    }
    (order.len() == overlays.len()).then_some(order)
}

/// Edges of the ring through `cycle`, each overlay hanging off its own
/// router.
///
/// With an even number of routers, tunnels to the opposite side have two
/// shortest routes and routing picks one by router ids. Router ids are
/// therefore chosen so that those picks match the routes `f` implies,
/// when such ids exist; otherwise routers are numbered in overlay order.
fn ring_edges(f: &InterferenceMatrix, cycle: &[NodeId]) -> Vec<(NodeId, NodeId)> {
    let k = cycle.len();
    let base = f.overlays().last().map_or(0, |m| m.0) + 1;
    let rank: Vec<usize> = match tie_ranks(f, cycle) {
        Some(r) => r,
        None => cycle.iter().map(|&o| f.index().rank(o).expect("overlay")).collect(),
    };
    let router = |pos: usize| NodeId(base + rank[pos] as u32);
    let mut edges = Vec::with_capacity(2 * k);
    for (pos, &o) in cycle.iter().enumerate() {
        edges.push((o, router(pos)));
        edges.push((router(pos), router((pos + 1) % k)));
    }
    edges
}

/// Directed ring links (as position pairs) of the route from position `s`
/// walking `steps` hops forwards or backwards.
fn ring_links(k: usize, s: usize, steps: usize, forward: bool) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    let mut cur = s;
    for _ in 0..steps {
        let next = if forward { (cur + 1) % k } else { (cur + k - 1) % k };
        out.insert((cur, next));
        cur = next;
    }
    out
}

/// Router ranks (by cycle position) that make tie-breaking reproduce the
/// opposite-side routes seen in `f`, or `None` when `f` does not pin them
/// down consistently.
fn tie_ranks(f: &InterferenceMatrix, cycle: &[NodeId]) -> Option<Vec<usize>> {
    let k = cycle.len();
    // position of overlay ranks
    let mut pos_of = vec![0; k];
    for (p, &o) in cycle.iter().enumerate() {
        pos_of[f.index().rank(o)?] = p;
    }
    let dist = |a: usize, b: usize| {
        let d = (b + k - a) % k;
        d.min(k - d)
    };
    let tunnel_pos = |t: usize| {
        let (s, d) = f.index().pair(t);
        (pos_of[f.index().rank(s).expect("overlay")], pos_of[f.index().rank(d).expect("overlay")])
    };
    // tunnels with a unique shortest route
    let route = |s: usize, d: usize, forward: bool| -> BTreeSet<(usize, usize)> { ring_links(k, s, dist(s, d), forward) };
    let forward_is_shorter = |s: usize, d: usize| 2 * ((d + k - s) % k) < k;
    let shares = |a: (usize, usize), la: &BTreeSet<(usize, usize)>, b: (usize, usize), lb: &BTreeSet<(usize, usize)>| {
        a.0 == b.0 || a.1 == b.1 || !la.is_disjoint(lb)
    };
    let fixed: Vec<Option<BTreeSet<(usize, usize)>>> = (0..f.len())
        .map(|t| {
            let (s, d) = tunnel_pos(t);
            if 2 * dist(s, d) == k {
                None
            } else {
                Some(route(s, d, forward_is_shorter(s, d)))
            }
        })
        .collect();
    // must_precede[x]: routers that need a smaller id than router x
    let mut must_precede: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut constrained = vec![false; k];
    for t in 0..f.len() {
        if fixed[t].is_some() {
            continue;
        }
        let (s, d) = tunnel_pos(t);
        let fits = |forward: bool| {
            let links = route(s, d, forward);
            (0..f.len()).all(|u| match &fixed[u] {
                Some(lu) if u != t => shares((s, d), &links, tunnel_pos(u), lu) == f.get(t, u),
                _ => true,
            })
        };
        let forward = match (fits(true), fits(false)) {
            (true, false) => true,
            (false, true) => false,
            _ => return None,
        };
        let (next, other) = ((s + 1) % k, (s + k - 1) % k);
        let (chosen, rejected) = if forward { (next, other) } else { (other, next) };
        if constrained[s] {
            return None;
        }
        constrained[s] = true;
        must_precede[rejected].push(chosen);
    }
    // Kahn's algorithm, releasing the router of the lowest-ranked overlay first
    let mut indegree: Vec<usize> = must_precede.iter().map(Vec::len).collect();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (x, preds) in must_precede.iter().enumerate() {
        for &p in preds {
            succ[p].push(x);
        }
    }
    let key = |p: usize| f.index().rank(cycle[p]).expect("overlay");
    let mut ready: BTreeSet<(usize, usize)> = (0..k).filter(|&p| indegree[p] == 0).map(|p| (key(p), p)).collect();
    let mut rank = vec![usize::MAX; k];
    let mut next_rank = 0;
    while let Some((_, p)) = ready.pop_first() {
        rank[p] = next_rank;
        next_rank += 1;
        for &x in &succ[p] {
            indegree[x] -= 1;
            if indegree[x] == 0 {
                ready.insert((key(x), x));
            }
        }
    }
    (next_rank == k).then_some(rank)
}

fn is_hosted_cycle(g: &NetworkGraph) -> bool {
    let routers: Vec<NodeId> = g.underlays().collect();
    routers.len() == g.overlay_count()
        && g.edge_count() == 2 * routers.len()
        && routers.iter().all(|&u| {
            let hosts = g.neighbors(u).filter(|&n| g.kind(n) == Some(NodeKind::Overlay)).count();
            hosts == 1 && g.degree(u) == 3
        })
        && g.is_connected()
}

/// Overlays whose routers are believed adjacent to the router of `i`.
///
/// Starts from the endpoints of the two least-interfering tunnels out of
/// `i`, then keeps admitting the destination of the least-interfering
/// tunnel from `i` that does not interfere with any tunnel between two
/// overlays already admitted.
pub fn all_neighbors(f: &InterferenceMatrix, overlays: &[NodeId], i: NodeId) -> Result<BTreeSet<NodeId>, RecoveryError> {
    let f = restrict(f, overlays)?;
    if f.index().rank(i).is_none() {
        return Err(RecoveryError::UnknownOverlay(i));
    }
    Ok(neighbors_in(&f, i))
}

pub(crate) fn neighbors_in(f: &InterferenceMatrix, i: NodeId) -> BTreeSet<NodeId> {
    let idx = f.index();
    let order = quietest_destinations(f, i);
    let mut r: BTreeSet<NodeId> = order.iter().take(2).copied().collect();
    loop {
        let admitted = order.iter().copied().find(|&n| {
            if r.contains(&n) {
                return false;
            }
            let k = idx.index(i, n).expect("both overlays");
            f.row(k).iter().all(|l| {
                let (s, d) = idx.pair(l);
                l == k || !(r.contains(&s) && r.contains(&d))
            })
        });
        match admitted {
            Some(n) => {
                r.insert(n);
            }
            None => return r,
        }
    }
}

/// Joins the router of every overlay to the routers of its
/// [`all_neighbors`]. Best effort: the disagreement with `f` is reported
/// rather than checked.
pub fn identify_rings(f: &InterferenceMatrix, overlays: &[NodeId]) -> Result<Reconstruction, RecoveryError> {
    let f = restrict(f, overlays)?;
    let mut adj: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
    for &i in f.overlays() {
        adj.entry(i).or_default();
        for r in neighbors_in(&f, i) {
            adj.entry(i).or_default().insert(r);
            adj.entry(r).or_default().insert(i);
        }
    }
    // a plain ring gets the same router ids as ring recovery would give it
    if let Some(cycle) = cyclic_order(&adj, f.overlays()) {
        return Ok(Reconstruction::assess(f.overlays().to_vec(), ring_edges(&f, &cycle), &f));
    }
    let mut edges = BTreeSet::new();
    for (&i, ns) in &adj {
        let p = router_of(&f, i);
        edges.insert((i, p));
        for &r in ns {
            let q = router_of(&f, r);
            edges.insert((p.min(q), p.max(q)));
        }
    }
    Ok(Reconstruction::assess(f.overlays().to_vec(), edges, &f))
}
