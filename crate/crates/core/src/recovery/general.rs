//! General networks: find groups of overlays that look like trees, recover
//! those as trees, recover the remaining core as a multi-ring network, and
//! graft each tree back where it best reproduces the matrix.

use std::collections::{BTreeMap, BTreeSet};

use crate::bounds::RecoveredGraph;
use crate::graph::NodeId;
use crate::interference::InterferenceMatrix;

use super::ring::identify_rings;
use super::tree::identify_tree;
use super::{are_siblings, restrict, Reconstruction, RecoveryError, SiblingPartition, WorkingInterference};

fn siblings_of(m: &InterferenceMatrix, live: &BTreeSet<NodeId>, x: NodeId) -> BTreeSet<NodeId> {
    live.iter()
        .copied()
        .filter(|&j| j == x || are_siblings(m, x, j))
        .collect()
}

/// Groups of overlays that hang off common trees, with the one overlay of
/// each group left standing for it (`anchors[g]` for `groups[g]`).
///
/// A candidate group is an overlay's sibling set cut down to the members
/// that every member agrees on. Groups sharing an overlay are merged. Each
/// time a group is found, all but its lowest-id member are dropped from the
/// matrix and the scan starts over.
pub fn sibling_groups(
    f: &InterferenceMatrix,
    overlays: &[NodeId],
) -> Result<(SiblingPartition, Vec<NodeId>), RecoveryError> {
    let f = restrict(f, overlays)?;
    let mut w = WorkingInterference::new(&f);
    let mut groups: Vec<BTreeSet<NodeId>> = Vec::new();
    let mut anchors: Vec<NodeId> = Vec::new();
    'scan: loop {
        let live = w.live_overlays().clone();
        for &i in &live {
            let m = w.matrix();
            let x = siblings_of(m, &live, i);
            let mut s = x.clone();
            for &j in &x {
                if j != i {
                    let xj = siblings_of(m, &live, j);
                    s.retain(|o| xj.contains(o));
                }
            }
            if s.len() < 2 {
                continue;
            }
            let overlapping: Vec<usize> = (0..groups.len()).filter(|&g| !groups[g].is_disjoint(&s)).collect();
            let anchor = *s.first().expect("non-empty");
            match overlapping.first() {
                None => {
                    groups.push(s.clone());
                    anchors.push(anchor);
                }
                Some(&first) => {
                    for &g in overlapping[1..].iter().rev() {
                        let merged = groups.remove(g);
                        anchors.remove(g);
                        groups[first].extend(merged);
                    }
                    groups[first].extend(s.iter().copied());
                    anchors[first] = anchor;
                }
            }
            let dropped: Vec<NodeId> = s.into_iter().filter(|&o| o != anchor).collect();
            w.remove(&dropped);
            continue 'scan;
        }
        break;
    }
    Ok((SiblingPartition { groups }, anchors))
}

/// Renumbers every router of `r` to fresh ids from `*next`. Router ids of a
/// partial result may clash with overlays it does not contain.
fn with_fresh_routers(r: &RecoveredGraph, next: &mut u32) -> BTreeSet<(NodeId, NodeId)> {
    let edges = &r.edges;
    let is_overlay = |n: NodeId| r.overlays.contains(&n);
    let mut map: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    let mut ids: Vec<NodeId> = edges.iter().flat_map(|&(a, b)| [a, b]).filter(|&n| !is_overlay(n)).collect();
    ids.sort();
    ids.dedup();
    for id in ids {
        map.insert(id, NodeId(*next));
        *next += 1;
    }
    let m = |n: NodeId| map.get(&n).copied().unwrap_or(n);
    edges.iter().map(|&(a, b)| (m(a).min(m(b)), m(a).max(m(b)))).collect()
}

/// Recovers a general network. Never fails on a valid matrix; the quality
/// of the result is reported as its disagreement with `f`.
///
/// Trees found among the sibling groups are cut out of the matrix except
/// for one anchor overlay each; the rest is recovered as a multi-ring core.
/// Each tree is then grafted back, either hanging off the anchor's router
/// or replacing it, at whichever tree router yields the matrix closest to
/// `f` (fewest edges on ties).
pub fn identify_general(f: &InterferenceMatrix, overlays: &[NodeId]) -> Result<Reconstruction, RecoveryError> {
    let f = restrict(f, overlays)?;
    let all: BTreeSet<NodeId> = f.overlays().iter().copied().collect();
    let (partition, anchors) = sibling_groups(&f, f.overlays())?;

    let mut w = WorkingInterference::new(&f);
    let mut trees: Vec<(RecoveredGraph, NodeId)> = Vec::new();
    for (group, &anchor) in partition.groups.iter().zip(&anchors) {
        let members: Vec<NodeId> = group.iter().copied().collect();
        if let Ok(t) = identify_tree(&f, &members) {
            let dropped: Vec<NodeId> = members.into_iter().filter(|&o| o != anchor).collect();
            w.remove(&dropped);
            trees.push((t, anchor));
        }
    }

    let live: Vec<NodeId> = w.live_overlays().iter().copied().collect();
    let core = identify_rings(w.matrix(), &live)?;
    let mut next = all.last().map_or(0, |o| o.0) + 1;
    let is_overlay = |n: NodeId| all.contains(&n);
    let mut edges = with_fresh_routers(&core.graph, &mut next);
    let mut present: BTreeSet<NodeId> = live.iter().copied().collect();

    for (tree, anchor) in &trees {
        let mut t = with_fresh_routers(tree, &mut next);
        let mut routers: BTreeSet<NodeId> = t.iter().flat_map(|&(a, b)| [a, b]).filter(|&n| !is_overlay(n)).collect();
        if routers.is_empty() {
            // two siblings joined directly: give them their shared router
            let (a, b) = *t.iter().next().expect("two-overlay tree has one edge");
            let u = NodeId(next);
            next += 1;
            t = [(a, u), (b, u)].into_iter().collect();
            routers.insert(u);
        }
        let Some(p) = edges
            .iter()
            .find_map(|&(a, b)| if a == *anchor { Some(b) } else if b == *anchor { Some(a) } else { None })
        else {
            continue;
        };
        let mut overlays_after = present.clone();
        overlays_after.extend(tree.overlays.iter().copied());
        let overlays_vec: Vec<NodeId> = overlays_after.iter().copied().collect();

        let mut best: Option<((usize, usize), BTreeSet<(NodeId, NodeId)>)> = None;
        let mut consider = |cand: BTreeSet<(NodeId, NodeId)>| {
            let r = Reconstruction::assess(overlays_vec.clone(), cand.iter().copied(), &f);
            let Some(d) = r.f_distance else { return };
            let key = (d, cand.len());
            if best.as_ref().is_none_or(|(k, _)| key < *k) {
                best = Some((key, cand));
            }
        };
        for &j in &routers {
            // hang the tree off the anchor's router at j
            let access = ((*anchor).min(p), (*anchor).max(p));
            let mut hang: BTreeSet<(NodeId, NodeId)> = edges.iter().copied().filter(|&e| e != access).collect();
            hang.extend(t.iter().copied());
            hang.insert((p.min(j), p.max(j)));
            consider(hang);
            // let j take over the anchor's router
            let mut merge: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
            for &(a, b) in &edges {
                if a == *anchor || b == *anchor {
                    continue;
                }
                let a = if a == p { j } else { a };
                let b = if b == p { j } else { b };
                merge.insert((a.min(b), a.max(b)));
            }
            merge.extend(t.iter().copied());
            consider(merge);
        }
        if let Some((_, e)) = best {
            edges = e;
            present = overlays_after;
        }
    }
    Ok(Reconstruction::assess(present.into_iter().collect(), edges, &f))
}
