//! Seeded network generators: Erdős–Rényi networks with random host
//! attachment, and minimal (or deliberately padded) trees and rings.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{reduce_to_minimal, GraphBuilder, NetworkGraph, NodeId, NodeKind};

use super::{EvalError, ExperimentConfig};

/// Resampling attempts before a configuration is declared degenerate.
pub const MAX_RESAMPLES: u32 = 64;

fn rng_for(seed: u64, attempt: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(attempt));
    rng
}

/// Largest connected component of an undirected graph on `0..n` (ties go
/// to the component containing the smallest vertex), in ascending order.
fn largest_component(n: usize, adj: &[Vec<usize>]) -> Vec<usize> {
    let mut comp = vec![usize::MAX; n];
    let mut best: Vec<usize> = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut members = vec![s];
        comp[s] = s;
        let mut head = 0;
        while head < members.len() {
            let u = members[head];
            head += 1;
            for &v in &adj[u] {
                if comp[v] == usize::MAX {
                    comp[v] = s;
                    members.push(v);
                }
            }
        }
        if members.len() > best.len() {
            best = members;
        }
    }
    best.sort_unstable();
    best
}

/// One draw of the random-network protocol; `None` when the sample cannot
/// host at least two overlays.
fn sample_network(n: usize, cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Option<NetworkGraph> {
    let p = cfg.edge_prob_for(n);
    let mut adj = vec![Vec::new(); n];
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(p) {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
    }
    let lcc = largest_component(n, &adj);
    let m = lcc.len();
    let hosts = ((cfg.overlay_fraction * m as f64).ceil() as usize).min(m);
    if hosts < 2 {
        return None;
    }
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in lcc.iter().enumerate() {
        pos[v] = i;
    }
    let under = |i: usize| NodeId((hosts + 1 + i) as u32);
    let mut b = GraphBuilder::new();
    for i in 0..m {
        b.add_node(under(i), NodeKind::Underlay);
    }
    for &v in &lcc {
        for &w in &adj[v] {
            if v < w {
                b.add_edge(under(pos[v]), under(pos[w]));
            }
        }
    }
    let mut chosen = sample(rng, m, hosts).into_vec();
    chosen.sort_unstable();
    for (o, &u) in chosen.iter().enumerate() {
        let id = NodeId(o as u32 + 1);
        b.add_node(id, NodeKind::Overlay);
        b.add_edge(id, under(u));
    }
    let g = b.build().ok()?;
    let r = reduce_to_minimal(&g).compacted().ok()?;
    (r.overlay_count() >= 2).then_some(r)
}

/// Erdős–Rényi network with hosts attached to a fraction of the routers of
/// its largest component, reduced to minimal form. Deterministic in `seed`;
/// degenerate draws are resampled on fresh RNG streams.
pub fn generate_random_network(n: usize, cfg: &ExperimentConfig, seed: u64) -> Result<NetworkGraph, EvalError> {
    if n < 4 {
        return Err(EvalError::InvalidConfig(format!("n = {n} is below 4")));
    }
    cfg.validate()?;
    for attempt in 0..MAX_RESAMPLES {
        if let Some(g) = sample_network(n, cfg, &mut rng_for(seed, attempt)) {
            return Ok(g);
        }
    }
    Err(EvalError::DegenerateSample { n, seed })
}

/// Random minimal tree with `leaves` overlay leaves (`leaves >= 2`): every
/// leaf is an overlay and every router has at least three neighbours.
///
/// Grown from a star by either hanging a new host off a random router or
/// splitting a random host's access link with a new router carrying that
/// host and a new one; both moves keep the tree minimal.
pub fn generate_minimal_tree(leaves: usize, seed: u64) -> NetworkGraph {
    assert!(leaves >= 2, "a tree needs at least two overlay leaves");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = leaves as u32;
    let mut b = GraphBuilder::new();
    let mut routers = vec![NodeId(k + 1)];
    b.add_node(routers[0], NodeKind::Underlay);
    let start = leaves.min(3) as u32;
    for o in 1..=start {
        b.add_node(NodeId(o), NodeKind::Overlay);
        b.add_edge(NodeId(o), routers[0]);
    }
    for o in start + 1..=k {
        let new = NodeId(o);
        b.add_node(new, NodeKind::Overlay);
        if rng.random_bool(0.5) {
            let r = routers[rng.random_range(0..routers.len())];
            b.add_edge(new, r);
        } else {
            let host = NodeId(rng.random_range(1..o));
            let parent = b.neighbors(host).next().expect("host is attached");
            let r = NodeId(k + 1 + routers.len() as u32);
            routers.push(r);
            b.add_node(r, NodeKind::Underlay);
            b.remove_edge(host, parent);
            b.add_edge(parent, r);
            b.add_edge(host, r);
            b.add_edge(new, r);
        }
    }
    b.build().expect("construction keeps the tree valid")
}

/// Ring of `k` routers with one host each, hosts placed in a random cyclic
/// order. Router `k + i` is the `i`-th ring position.
pub fn generate_minimal_ring(k: usize, seed: u64) -> NetworkGraph {
    assert!(k >= 3, "a ring needs at least three routers");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<u32> = (1..=k as u32).collect();
    use rand::seq::SliceRandom;
    order.shuffle(&mut rng);
    let mut b = GraphBuilder::new();
    let router = |i: usize| NodeId((k + 1 + i) as u32);
    for (i, &o) in order.iter().enumerate() {
        b.add_node(router(i), NodeKind::Underlay);
        b.add_node(NodeId(o), NodeKind::Overlay);
        b.add_edge(NodeId(o), router(i));
    }
    for i in 0..k {
        b.add_edge(router(i), router((i + 1) % k));
    }
    b.build().expect("ring is valid")
}

/// Hosts of a ring network in cyclic order, starting from the router with
/// the smallest id and walking towards its smaller-id neighbour.
pub fn ring_order(g: &NetworkGraph) -> Option<Vec<NodeId>> {
    let routers: Vec<NodeId> = g.underlays().collect();
    let start = *routers.first()?;
    let mut order = Vec::with_capacity(routers.len());
    let mut prev = None;
    let mut cur = start;
    loop {
        let hosts: Vec<NodeId> = g.neighbors(cur).filter(|&n| g.is_overlay(n)).collect();
        let ring: Vec<NodeId> = g.neighbors(cur).filter(|&n| !g.is_overlay(n)).collect();
        if hosts.len() != 1 || ring.len() != 2 {
            return None;
        }
        order.push(hosts[0]);
        let next = match prev {
            None => ring[0],
            Some(p) => *ring.iter().find(|&&n| n != p)?,
        };
        prev = Some(cur);
        cur = next;
        if cur == start {
            break;
        }
        if order.len() > routers.len() {
            return None;
        }
    }
    (order.len() == routers.len()).then_some(order)
}

/// True when two cyclic sequences agree up to rotation and reflection.
pub fn same_cycle(a: &[NodeId], b: &[NodeId]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    if a.is_empty() {
        return true;
    }
    let n = a.len();
    let Some(shift) = b.iter().position(|&x| x == a[0]) else {
        return false;
    };
    let forward = (0..n).all(|i| a[i] == b[(shift + i) % n]);
    let backward = (0..n).all(|i| a[i] == b[(shift + n - i) % n]);
    forward || backward
}

/// Splits `count` random edges of `g` with fresh degree-2 routers. The
/// result has the same interference matrix as `g` and reduces back to it.
pub fn pad_with_relays(g: &NetworkGraph, count: usize, seed: u64) -> NetworkGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = g.to_builder();
    let mut next = g.max_id() + 1;
    for _ in 0..count {
        let edges: Vec<(NodeId, NodeId)> = b
            .nodes()
            .flat_map(|a| b.neighbors(a).filter(move |&c| a < c).map(move |c| (a, c)))
            .collect();
        let (a, c) = edges[rng.random_range(0..edges.len())];
        let r = NodeId(next);
        next += 1;
        b.add_node(r, NodeKind::Underlay);
        b.remove_edge(a, c);
        b.add_edge(a, r);
        b.add_edge(r, c);
    }
    b.build().expect("subdivision keeps the graph valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interference::ground_truth;

    fn is_minimal(g: &NetworkGraph) -> bool {
        g.underlays().all(|u| g.degree(u) >= 3)
    }

    #[test]
    fn trees_are_minimal_with_requested_leaves() {
        for leaves in 2..25 {
            for seed in 0..10 {
                let g = generate_minimal_tree(leaves, seed);
                assert_eq!(g.overlay_count(), leaves);
                assert_eq!(g.edge_count() + 1, g.node_count(), "tree");
                if leaves >= 3 {
                    assert!(is_minimal(&g));
                }
                assert!(g.has_canonical_overlays());
                assert_eq!(reduce_to_minimal(&g), g);
            }
        }
    }

    #[test]
    fn rings_round_trip_their_order() {
        let g = generate_minimal_ring(7, 3);
        let order = ring_order(&g).unwrap();
        assert_eq!(order.len(), 7);
        assert!(is_minimal(&g));
        let mut rotated = order.clone();
        rotated.rotate_left(3);
        rotated.reverse();
        assert!(same_cycle(&order, &rotated));
        let mut swapped = order.clone();
        swapped.swap(0, 1);
        assert!(!same_cycle(&order, &swapped));
    }

    #[test]
    fn padding_keeps_interference_and_reduces_back() {
        let g = generate_minimal_tree(6, 1);
        let p = pad_with_relays(&g, 3, 9);
        assert_eq!(p.edge_count(), g.edge_count() + 3);
        assert_eq!(ground_truth(&p).unwrap(), ground_truth(&g).unwrap());
        assert_eq!(reduce_to_minimal(&p).compacted().unwrap(), g.compacted().unwrap());
    }

    #[test]
    fn random_networks_are_valid_and_deterministic() {
        let cfg = ExperimentConfig::default();
        for seed in 0..100 {
            let g = generate_random_network(10, &cfg, seed).unwrap();
            assert!(g.overlay_count() >= 2);
            assert!(g.is_connected());
            assert!(is_minimal(&g) || g.underlays().count() == 1);
            assert_eq!(generate_random_network(10, &cfg, seed).unwrap(), g);
        }
    }

    #[test]
    fn complete_graph_survives() {
        let cfg = ExperimentConfig {
            edge_prob: Some(1.0),
            ..ExperimentConfig::default()
        };
        let g = generate_random_network(6, &cfg, 0).unwrap();
        assert_eq!(g.underlays().count(), 6);
        assert_eq!(g.overlay_count(), 5);
        assert!(is_minimal(&g));
    }

    #[test]
    fn too_small() {
        assert!(matches!(
            generate_random_network(3, &ExperimentConfig::default(), 0),
            Err(EvalError::InvalidConfig(_))
        ));
    }
}
