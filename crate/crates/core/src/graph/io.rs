//! Plain-text graph files and Graphviz export.
//!
//! ```text
//! # comment
//! overlay 2 underlay 1
//! 1 3
//! 2 3
//! ```

use std::fmt::Write as _;

use super::{build_network, GraphError, NetworkGraph};

pub fn parse_graph(text: &str) -> Result<NetworkGraph, GraphError> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| GraphError::Parse {
            line: i + 1,
            message,
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if header.is_none() {
            match tokens[..] {
                ["overlay", k, "underlay", m] => {
                    let k = k.parse().map_err(|_| err(format!("bad overlay count {k:?}")))?;
                    let m = m.parse().map_err(|_| err(format!("bad underlay count {m:?}")))?;
                    header = Some((k, m));
                }
                _ => return Err(err("expected `overlay <k> underlay <m>`".into())),
            }
            continue;
        }
        let (k, m) = header.unwrap();
        let [a, b] = tokens[..] else {
            return Err(err("expected an edge line `i j`".into()));
        };
        let parse_id = |s: &str| -> Result<u32, GraphError> {
            let v: u32 = s.parse().map_err(|_| err(format!("bad node id {s:?}")))?;
            if v == 0 || v as usize > k + m {
                return Err(err(format!("node id {v} out of range 1..={}", k + m)));
            }
            Ok(v)
        };
        edges.push((parse_id(a)?, parse_id(b)?));
    }
    let (k, m) = header.ok_or(GraphError::Parse {
        line: 0,
        message: "missing header".into(),
    })?;
    build_network(k, m, &edges)
}

/// Writes the graph, renumbering underlays to a contiguous block first.
pub fn write_graph(g: &NetworkGraph) -> Result<String, GraphError> {
    let g = g.compacted()?;
    let k = g.overlay_count();
    let mut out = format!("overlay {} underlay {}\n", k, g.node_count() - k);
    for (a, b) in g.edges() {
        writeln!(out, "{a} {b}").unwrap();
    }
    Ok(out)
}

pub fn to_dot(g: &NetworkGraph) -> String {
    let mut out = String::from("graph G {\n");
    for id in g.nodes() {
        let shape = if g.is_overlay(id) { "circle" } else { "box" };
        writeln!(out, "  {id} [shape={shape}];").unwrap();
    }
    for (a, b) in g.edges() {
        writeln!(out, "  {a} -- {b};").unwrap();
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_write() {
        let text = "# tiny\noverlay 2 underlay 1\n1 3 # edge\n\n2 3\n";
        let g = parse_graph(text).unwrap();
        assert_eq!(g.edge_count(), 2);
        let out = write_graph(&g).unwrap();
        assert_eq!(out, "overlay 2 underlay 1\n1 3\n2 3\n");
        assert_eq!(parse_graph(&out).unwrap(), g);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_graph("1 2\n"),
            Err(GraphError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_graph("overlay 2 underlay 1\n1 4\n"),
            Err(GraphError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn dot_shapes() {
        let g = parse_graph("overlay 2 underlay 1\n1 3\n2 3\n").unwrap();
        let dot = to_dot(&g);
        assert!(dot.contains("1 [shape=circle]"));
        assert!(dot.contains("3 [shape=box]"));
        assert!(dot.contains("1 -- 3;"));
    }
}
