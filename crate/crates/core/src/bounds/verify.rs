use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::{enumerate_tunnels, GraphBuilder, GraphError, NetworkGraph, NodeId, NodeKind, TunnelSet};
use crate::interference::InterferenceMatrix;

use super::BoundsError;

/// A candidate topology together with an explicit route for every tunnel.
///
/// Unlike [`NetworkGraph`] this is not validated on construction, so that
/// externally produced solutions can be checked and their defects reported.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecoveredGraph {
    pub overlays: Vec<NodeId>,
    /// Undirected edges, stored as `(low, high)`.
    pub edges: BTreeSet<(NodeId, NodeId)>,
    /// One node path per tunnel, in canonical tunnel order.
    pub paths: Vec<Vec<NodeId>>,
}

impl RecoveredGraph {
    pub fn new(overlays: Vec<NodeId>, edges: impl IntoIterator<Item = (NodeId, NodeId)>, paths: Vec<Vec<NodeId>>) -> Self {
        let mut overlays = overlays;
        overlays.sort();
        overlays.dedup();
        RecoveredGraph {
            overlays,
            edges: edges.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect(),
            paths,
        }
    }

    /// The graph with its own shortest-path routes.
    pub fn from_network(g: &NetworkGraph) -> Result<Self, GraphError> {
        let ts = enumerate_tunnels(g)?;
        Ok(Self::from_tunnels(g, &ts))
    }

    pub fn from_tunnels(g: &NetworkGraph, ts: &TunnelSet) -> Self {
        RecoveredGraph::new(
            g.overlays().collect(),
            g.edges(),
            ts.tunnels().iter().map(|t| t.path.clone()).collect(),
        )
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> BTreeSet<NodeId> {
        self.edges
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .chain(self.overlays.iter().copied())
            .collect()
    }

    /// Validates the topology as a [`NetworkGraph`]; every non-overlay node
    /// becomes an underlay node.
    pub fn network(&self) -> Result<NetworkGraph, GraphError> {
        let mut b = GraphBuilder::new();
        let overlays: HashSet<NodeId> = self.overlays.iter().copied().collect();
        for id in self.nodes() {
            let kind = if overlays.contains(&id) {
                NodeKind::Overlay
            } else {
                NodeKind::Underlay
            };
            b.add_node(id, kind);
        }
        for &(a, b2) in &self.edges {
            b.try_add_edge(a, b2)?;
        }
        b.build()
    }

    /// Removes edges that no tunnel uses.
    pub fn without_unused_edges(&self) -> Self {
        let used: BTreeSet<(NodeId, NodeId)> = self
            .paths
            .iter()
            .flat_map(|p| p.windows(2).map(|w| (w[0].min(w[1]), w[0].max(w[1]))))
            .collect();
        RecoveredGraph {
            overlays: self.overlays.clone(),
            edges: self.edges.intersection(&used).copied().collect(),
            paths: self.paths.clone(),
        }
    }
}

/// Constraint families of the integer program, used to tag violations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Constraint {
    /// A tunnel uses a link whose edge is absent.
    EdgeOr,
    /// An overlay does not have exactly one neighbour.
    OverlayDegree,
    /// A tunnel is not a connected path between its endpoints.
    Flow,
    /// A tunnel revisits a node.
    Mtz,
    /// Non-interfering tunnels share a directed link.
    NoShare,
    /// Interfering tunnels share no directed link.
    MustShare,
}

impl Constraint {
    pub fn tag(self) -> &'static str {
        match self {
            Constraint::EdgeOr => "edge-or",
            Constraint::OverlayDegree => "overlay-degree",
            Constraint::Flow => "flow",
            Constraint::Mtz => "mtz",
            Constraint::NoShare => "no-share",
            Constraint::MustShare => "must-share",
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    pub violations: Vec<Violation>,
}

impl Verification {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, c: Constraint) -> usize {
        self.violations.iter().filter(|v| v.constraint == c).count()
    }
}

/// Checks a candidate against every constraint of the integer program.
/// Edges no tunnel uses are allowed; they only cost objective value.
pub fn verify_solution(f: &InterferenceMatrix, candidate: &RecoveredGraph) -> Result<Verification, BoundsError> {
    if candidate.overlays != f.overlays() {
        return Err(BoundsError::IndexMismatch(format!(
            "candidate overlays {:?} differ from matrix overlays {:?}",
            candidate.overlays,
            f.overlays()
        )));
    }
    if candidate.paths.len() != f.len() {
        return Err(BoundsError::IndexMismatch(format!(
            "{} tunnel paths for a {}-tunnel matrix",
            candidate.paths.len(),
            f.len()
        )));
    }
    let mut out = Vec::new();
    let mut push = |constraint, detail: String| out.push(Violation { constraint, detail });

    let mut degree: BTreeMap<NodeId, usize> = BTreeMap::new();
    for &(a, b) in &candidate.edges {
        if a == b {
            push(Constraint::Flow, format!("self-loop at {a}"));
        }
        *degree.entry(a).or_default() += 1;
        *degree.entry(b).or_default() += 1;
    }
    for &o in &candidate.overlays {
        let d = degree.get(&o).copied().unwrap_or(0);
        if d != 1 {
            push(Constraint::OverlayDegree, format!("overlay {o} has {d} neighbours"));
        }
    }

    let mut link_sets: Vec<HashSet<(NodeId, NodeId)>> = Vec::with_capacity(f.len());
    for (t, path) in candidate.paths.iter().enumerate() {
        let label = f.index().label(t);
        let (s, d) = f.index().pair(t);
        if path.first() != Some(&s) || path.last() != Some(&d) {
            push(Constraint::Flow, format!("tunnel {label} runs {path:?}"));
        }
        let mut seen = HashSet::new();
        for &n in path {
            if !seen.insert(n) {
                push(Constraint::Mtz, format!("tunnel {label} revisits {n}"));
            }
        }
        for w in path.windows(2) {
            if !candidate.edges.contains(&(w[0].min(w[1]), w[0].max(w[1]))) {
                push(Constraint::EdgeOr, format!("tunnel {label} uses missing link {}-{}", w[0], w[1]));
            }
        }
        link_sets.push(path.windows(2).map(|w| (w[0], w[1])).collect());
    }

    let mut by_link: HashMap<(NodeId, NodeId), Vec<usize>> = HashMap::new();
    for (t, links) in link_sets.iter().enumerate() {
        for &l in links {
            by_link.entry(l).or_default().push(t);
        }
    }
    let mut sharing: BTreeSet<(usize, usize)> = BTreeSet::new();
    for ts in by_link.values() {
        for (i, &a) in ts.iter().enumerate() {
            for &b in &ts[i + 1..] {
                sharing.insert((a.min(b), a.max(b)));
            }
        }
    }
    for &(a, b) in &sharing {
        if !f.get(a, b) {
            push(
                Constraint::NoShare,
                format!("{} and {} share a link", f.index().label(a), f.index().label(b)),
            );
        }
    }
    for (a, b) in f.interfering_pairs() {
        if !sharing.contains(&(a, b)) {
            push(
                Constraint::MustShare,
                format!("{} and {} share no link", f.index().label(a), f.index().label(b)),
            );
        }
    }
    Ok(Verification { violations: out })
}

/// Witness search result: for each directed link used by some tunnel, a pair
/// of tunnels whose only common directed link is that one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniqueIntersection {
    pub holds: bool,
    pub witnesses: Vec<((NodeId, NodeId), Option<(usize, usize)>)>,
}

impl UniqueIntersection {
    /// Undirected edges with at least one witness-free direction in use.
    pub fn witness_free_edges(&self) -> BTreeSet<(NodeId, NodeId)> {
        self.witnesses
            .iter()
            .filter(|(_, w)| w.is_none())
            .map(|&((a, b), _)| (a.min(b), a.max(b)))
            .collect()
    }
}

/// When every used directed link has a witness, no network with fewer edges
/// produces the same interference.
pub fn check_unique_intersection_condition(tunnels: &TunnelSet) -> UniqueIntersection {
    let sets: Vec<BTreeSet<(NodeId, NodeId)>> = tunnels.tunnels().iter().map(|t| t.link_set()).collect();
    let mut witnesses: BTreeMap<(NodeId, NodeId), Option<(usize, usize)>> =
        sets.iter().flatten().map(|&l| (l, None)).collect();
    for k in 0..sets.len() {
        for l in k + 1..sets.len() {
            let mut common = sets[k].intersection(&sets[l]);
            if let (Some(&link), None) = (common.next(), common.next()) {
                let slot = witnesses.get_mut(&link).expect("link is used");
                if slot.is_none() {
                    *slot = Some((k, l));
                }
            }
        }
    }
    let holds = witnesses.values().all(Option::is_some);
    UniqueIntersection {
        holds,
        witnesses: witnesses.into_iter().collect(),
    }
}
