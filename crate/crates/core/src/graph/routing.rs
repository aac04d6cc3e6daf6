//! Hop-count shortest path routing.
//!
//! Ties between equal-length paths are broken towards the lexicographically
//! smallest node-id sequence. Walking greedily from the source and always
//! stepping to the smallest neighbour that is one hop closer to the
//! destination yields exactly that path.

use std::collections::BTreeMap;

use super::{GraphError, NetworkGraph, NodeId, Tunnel, TunnelIndex, TunnelSet};

pub fn shortest_path_route(
    g: &NetworkGraph,
    src: NodeId,
    dst: NodeId,
) -> Result<Tunnel, GraphError> {
    for id in [src, dst] {
        if !g.contains(id) {
            return Err(GraphError::UnknownNode(id));
        }
        if !g.is_overlay(id) {
            return Err(GraphError::NotOverlay(id));
        }
    }
    if src == dst {
        return Err(GraphError::SameEndpoints(src));
    }
    let dist = g.bfs_distances(dst);
    let path = walk(g, &dist, src, dst)?;
    let index = TunnelIndex::new(g.overlays().collect());
    Ok(Tunnel {
        id: index.index(src, dst).expect("both endpoints are overlays"),
        path,
    })
}

fn walk(
    g: &NetworkGraph,
    dist_to_dst: &BTreeMap<NodeId, usize>,
    src: NodeId,
    dst: NodeId,
) -> Result<Vec<NodeId>, GraphError> {
    let Some(&hops) = dist_to_dst.get(&src) else {
        return Err(GraphError::Unreachable(src, dst));
    };
    let mut path = Vec::with_capacity(hops + 1);
    let mut cur = src;
    path.push(cur);
    while cur != dst {
        let d = dist_to_dst[&cur];
        // neighbours iterate in ascending id order
        cur = g
            .neighbors(cur)
            .find(|n| dist_to_dst.get(n) == Some(&(d - 1)))
            .expect("bfs layering guarantees a closer neighbour");
        path.push(cur);
    }
    Ok(path)
}

/// Routes every ordered overlay pair.
pub fn enumerate_tunnels(g: &NetworkGraph) -> Result<TunnelSet, GraphError> {
    let index = TunnelIndex::new(g.overlays().collect());
    let dists: BTreeMap<NodeId, BTreeMap<NodeId, usize>> = index
        .overlays()
        .iter()
        .map(|&o| (o, g.bfs_distances(o)))
        .collect();
    let mut tunnels = Vec::with_capacity(index.len());
    for (id, (s, d)) in index.pairs().enumerate() {
        let path = walk(g, &dists[&d], s, d)?;
        tunnels.push(Tunnel { id, path });
    }
    Ok(TunnelSet { index, tunnels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_network;

    fn ids(v: &[u32]) -> Vec<NodeId> {
        v.iter().map(|&i| NodeId(i)).collect()
    }

    /// All shortest paths by explicit enumeration over BFS layers.
    fn all_shortest_paths(g: &NetworkGraph, s: NodeId, d: NodeId) -> Vec<Vec<NodeId>> {
        let dist = g.bfs_distances(d);
        let mut out = Vec::new();
        let mut stack = vec![vec![s]];
        while let Some(p) = stack.pop() {
            let last = *p.last().unwrap();
            if last == d {
                out.push(p);
                continue;
            }
            for n in g.neighbors(last) {
                if dist.get(&n) == Some(&(dist[&last] - 1)) {
                    let mut q = p.clone();
                    q.push(n);
                    stack.push(q);
                }
            }
        }
        out
    }

    #[test]
    fn grid_route_from_1_to_4() {
        let g = crate::graph::grid_network();
        let t = shortest_path_route(&g, NodeId(1), NodeId(4)).unwrap();
        assert_eq!(t.path, ids(&[1, 8, 7, 4]));
    }

    #[test]
    fn ring_adjacent_parents() {
        // ring 7..12, overlay i on underlay 6+i
        let mut edges: Vec<(u32, u32)> = (0..6).map(|i| (7 + i, 7 + (i + 1) % 6)).collect();
        edges.extend((1..=6).map(|i| (i, 6 + i)));
        let g = build_network(6, 6, &edges).unwrap();
        let t = shortest_path_route(&g, NodeId(2), NodeId(3)).unwrap();
        assert_eq!(t.path, ids(&[2, 8, 9, 3]));
    }

    #[test]
    fn ties_take_lexicographically_smallest_path() {
        // square 5-6-8-7-5 with overlays on 5 and 8: two 2-hop routes
        let edges = [(5, 6), (6, 8), (8, 7), (7, 5), (1, 5), (2, 8), (3, 6), (4, 7)];
        let g = build_network(4, 4, &edges).unwrap();
        for (s, d) in [(1u32, 2u32), (2, 1), (3, 4), (4, 3)] {
            let t = shortest_path_route(&g, NodeId(s), NodeId(d)).unwrap();
            let all = all_shortest_paths(&g, NodeId(s), NodeId(d));
            assert!(all.len() >= 2);
            assert_eq!(&t.path, all.iter().min().unwrap());
        }
    }

    #[test]
    fn errors() {
        let g = build_network(2, 1, &[(1, 3), (2, 3)]).unwrap();
        assert_eq!(
            shortest_path_route(&g, NodeId(1), NodeId(1)).unwrap_err(),
            GraphError::SameEndpoints(NodeId(1))
        );
        assert_eq!(
            shortest_path_route(&g, NodeId(1), NodeId(3)).unwrap_err(),
            GraphError::NotOverlay(NodeId(3))
        );
    }

    #[test]
    fn tunnel_counts() {
        let g = crate::graph::grid_network();
        assert_eq!(enumerate_tunnels(&g).unwrap().len(), 30);
        let g = build_network(2, 2, &[(1, 3), (3, 4), (4, 2)]).unwrap();
        let ts = enumerate_tunnels(&g).unwrap();
        assert_eq!(ts.len(), 2);
        assert_eq!(ts.tunnels()[1].path, ids(&[2, 4, 3, 1]));
    }

    #[test]
    fn routes_match_oracle_on_random_graphs() {
        use rand::{Rng, SeedableRng};
        for seed in 0..40u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let k = 4;
            let m = 7;
            // ring backbone keeps the graph connected; random chords add ties
            let mut edges: Vec<(u32, u32)> = (0..m)
                .map(|i| (k + 1 + i, k + 1 + (i + 1) % m))
                .collect();
            for _ in 0..4 {
                let a = rng.random_range(0..m) + k + 1;
                let b = rng.random_range(0..m) + k + 1;
                if a != b && !edges.contains(&(a, b)) && !edges.contains(&(b, a)) {
                    edges.push((a, b));
                }
            }
            for o in 1..=k {
                edges.push((o, k + 1 + rng.random_range(0..m)));
            }
            let g = build_network(k as usize, m as usize, &edges).unwrap();
            let ts = enumerate_tunnels(&g).unwrap();
            for t in ts.tunnels() {
                let all = all_shortest_paths(&g, t.source(), t.destination());
                assert_eq!(&t.path, all.iter().min().unwrap());
                let again = shortest_path_route(&g, t.source(), t.destination()).unwrap();
                assert_eq!(&again, t);
            }
        }
    }
}
