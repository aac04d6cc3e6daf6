//! Solver solution files: one variable per line, as `name=value`,
//! `name value`, or `index name value ...`. Lines starting with `#` and a
//! leading status line mentioning the objective are skipped.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::bounds::RecoveredGraph;
use crate::graph::NodeId;

use super::{IlpError, IlpModel};

pub fn parse_solution_values(text: &str) -> Result<HashMap<String, f64>, IlpError> {
    let mut out = HashMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if n == 0 && line.to_ascii_lowercase().contains("objective") {
            continue;
        }
        let bad = || IlpError::Solution(format!("line {}: cannot read {line:?}", n + 1));
        let (name, value) = if let Some((a, b)) = line.split_once('=') {
            (a.trim(), b.trim())
        } else {
            let t: Vec<&str> = line.split_whitespace().collect();
            match t[..] {
                [a, b] => (a, b),
                [i, a, b, ..] if i.parse::<u64>().is_ok() => (a, b),
                _ => return Err(bad()),
            }
        };
        let value: f64 = value.parse().map_err(|_| bad())?;
        out.insert(name.to_string(), value);
    }
    Ok(out)
}

fn split_name(name: &str) -> Option<(&str, Vec<usize>)> {
    let mut parts = name.split('_');
    let prefix = parts.next()?;
    let nums = parts.map(|p| p.parse().ok()).collect::<Option<Vec<usize>>>()?;
    Some((prefix, nums))
}

/// Materialises the edges and tunnel routes set to 1 in a solution.
pub fn import_solution(model: &IlpModel, text: &str) -> Result<RecoveredGraph, IlpError> {
    let values = parse_solution_values(text)?;
    let n = model.node_budget;
    let tunnels = model.matrix.len();
    let node = |i: usize| -> Result<NodeId, IlpError> {
        if (1..=n).contains(&i) {
            Ok(model.node_id(i))
        } else {
            Err(IlpError::Solution(format!("node {i} outside 1..={n}")))
        }
    };
    let mut edges = BTreeSet::new();
    let mut arcs: Vec<BTreeMap<NodeId, Vec<NodeId>>> = vec![BTreeMap::new(); tunnels];
    let mut arc_count = vec![0usize; tunnels];
    for (name, &v) in &values {
        if v < 0.5 {
            continue;
        }
        match split_name(name) {
            Some(("x", ref ij)) if ij.len() == 2 => {
                edges.insert((node(ij[0])?, node(ij[1])?));
            }
            Some(("xt", ref lij)) if lij.len() == 3 => {
                let l = lij[0];
                if l >= tunnels {
                    return Err(IlpError::Solution(format!("tunnel {l} out of range")));
                }
                arcs[l].entry(node(lij[1])?).or_default().push(node(lij[2])?);
                arc_count[l] += 1;
            }
            _ => {}
        }
    }
    let mut paths = Vec::with_capacity(tunnels);
    for (l, succ) in arcs.iter().enumerate() {
        let (s, d) = model.matrix.index().pair(l);
        let mut path = vec![s];
        let mut cur = s;
        let mut seen = BTreeSet::from([s]);
        while cur != d {
            let next = match succ.get(&cur).map(Vec::as_slice) {
                None | Some([]) => break,
                Some([one]) => *one,
                Some(_) => {
                    return Err(IlpError::Solution(format!(
                        "tunnel {} branches at node {cur}",
                        model.matrix.index().label(l)
                    )))
                }
            };
            path.push(next);
            if !seen.insert(next) {
                break;
            }
            cur = next;
        }
        if path.len() - 1 != arc_count[l] {
            return Err(IlpError::Solution(format!(
                "tunnel {}: {} links set but only {} lie on the route from its source",
                model.matrix.index().label(l),
                arc_count[l],
                path.len() - 1
            )));
        }
        paths.push(path);
    }
    Ok(RecoveredGraph::new(model.matrix.overlays().to_vec(), edges, paths))
}

/// Writes a candidate as a solution file of the model (non-zero variables
/// only). Fails when a node of the candidate has no model counterpart.
pub fn write_solution(model: &IlpModel, candidate: &RecoveredGraph) -> Result<String, IlpError> {
    let idx = |id: NodeId| {
        model.model_node(id).ok_or_else(|| {
            IlpError::Solution(format!(
                "node {id} does not fit the model's {} nodes",
                model.node_budget
            ))
        })
    };
    let mut lines = BTreeSet::new();
    for &(a, b) in &candidate.edges {
        let (i, j) = (idx(a)?, idx(b)?);
        lines.insert((0, 0, i.min(j), j.max(i)));
    }
    for (l, path) in candidate.paths.iter().enumerate() {
        for w in path.windows(2) {
            lines.insert((1, l, idx(w[0])?, idx(w[1])?));
        }
    }
    let mut out = String::new();
    for (kind, l, i, j) in lines {
        if kind == 0 {
            writeln!(out, "x_{i}_{j}=1").unwrap();
        } else {
            writeln!(out, "xt_{l}_{i}_{j}=1").unwrap();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::verify_solution;
    use crate::graph::grid_network;
    use crate::ilp::build_ilp_model;
    use crate::interference::ground_truth;

    #[test]
    fn value_formats() {
        let v = parse_solution_values("# Objective value = 3\nx_1_2=1\nx_1_3 0\n  7 x_2_3   1  0\n").unwrap();
        assert_eq!(v["x_1_2"], 1.0);
        assert_eq!(v["x_1_3"], 0.0);
        assert_eq!(v["x_2_3"], 1.0);
        assert!(parse_solution_values("x_1_2 = one\n").is_err());
    }

    #[test]
    fn grid_solution_round_trip() {
        let g = grid_network();
        let f = ground_truth(&g).unwrap();
        let m = build_ilp_model(&f, 12).unwrap();
        let cand = RecoveredGraph::from_network(&g).unwrap();
        let text = write_solution(&m, &cand).unwrap();
        let back = import_solution(&m, &text).unwrap();
        assert_eq!(back, cand);
        assert!(verify_solution(&f, &back).unwrap().feasible());
    }

    #[test]
    fn branching_route_is_rejected() {
        let g = grid_network();
        let f = ground_truth(&g).unwrap();
        let m = build_ilp_model(&f, 12).unwrap();
        let cand = RecoveredGraph::from_network(&g).unwrap();
        let mut text = write_solution(&m, &cand).unwrap();
        text.push_str("xt_0_8_7=1\n");
        assert!(matches!(import_solution(&m, &text), Err(IlpError::Solution(_))));
    }
}
