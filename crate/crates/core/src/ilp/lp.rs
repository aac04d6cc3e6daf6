//! CPLEX LP text format, as read by most MILP solvers.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{ConstraintTag, IlpError, IlpModel, LinearConstraint, LinearProgram, Sense, VarKind, Variable};

const TERMS_PER_LINE: usize = 8;

fn write_terms(out: &mut String, terms: &[(i64, usize)], vars: &[Variable]) {
    for (n, &(c, v)) in terms.iter().enumerate() {
        if n > 0 && n % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let name = &vars[v].name;
        let sign = if c < 0 { "-" } else { "+" };
        let mag = c.unsigned_abs();
        match (n, c < 0, mag) {
            (0, false, 1) => write!(out, " {name}"),
            (0, false, _) => write!(out, " {mag} {name}"),
            (_, _, 1) => write!(out, " {sign} {name}"),
            _ => write!(out, " {sign} {mag} {name}"),
        }
        .unwrap();
    }
}

pub fn export_lp(model: &IlpModel) -> String {
    let lp = &model.program;
    let mut out = String::new();
    writeln!(
        out,
        "\\ smallest network for {} overlays with at most {} nodes",
        model.overlay_count(),
        model.node_budget
    )
    .unwrap();
    out.push_str("Minimize\n obj:");
    write_terms(&mut out, &lp.objective, &lp.variables);
    out.push_str("\nSubject To\n");
    for (n, c) in lp.constraints.iter().enumerate() {
        write!(out, " {}_{n}:", c.tag.ident()).unwrap();
        write_terms(&mut out, &c.terms, &lp.variables);
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        writeln!(out, " {op} {}", c.rhs).unwrap();
    }
    let continuous: Vec<&Variable> = lp
        .variables
        .iter()
        .filter(|v| v.kind == VarKind::NonNegative)
        .collect();
    if !continuous.is_empty() {
        out.push_str("Bounds\n");
        for v in continuous {
            writeln!(out, " {} >= 0", v.name).unwrap();
        }
    }
    out.push_str("Binary\n");
    for v in lp.variables.iter().filter(|v| v.kind == VarKind::Binary) {
        writeln!(out, " {}", v.name).unwrap();
    }
    out.push_str("End\n");
    out
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    Binary,
    General,
    End,
}

fn section_header(line: &str) -> Option<Section> {
    match line.to_ascii_lowercase().as_str() {
        "minimize" | "minimise" | "min" => Some(Section::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
        "bounds" | "bound" => Some(Section::Bounds),
        "binary" | "binaries" | "bin" => Some(Section::Binary),
        "general" | "generals" | "gen" => Some(Section::General),
        "end" => Some(Section::End),
        _ => None,
    }
}

struct Builder {
    variables: Vec<Variable>,
    by_name: HashMap<String, usize>,
    declared_binary: Vec<bool>,
}

impl Builder {
    fn var(&mut self, name: &str) -> usize {
        if let Some(&i) = self.by_name.get(name) {
            return i;
        }
        self.variables.push(Variable {
            name: name.to_string(),
            kind: VarKind::NonNegative,
        });
        self.declared_binary.push(false);
        self.by_name.insert(name.to_string(), self.variables.len() - 1);
        self.variables.len() - 1
    }
}

/// Parsed statement: optional name, linear terms, optional comparison.
struct Statement {
    name: Option<String>,
    terms: Vec<(i64, String)>,
    cmp: Option<(Sense, i64)>,
}

fn parse_statement(text: &str, line: usize) -> Result<Statement, IlpError> {
    let err = |message: String| IlpError::Parse { line, message };
    let mut tokens: Vec<&str> = text.split_whitespace().collect();
    let mut name = None;
    if let Some(first) = tokens.first() {
        if let Some(n) = first.strip_suffix(':') {
            name = Some(n.to_string());
            tokens.remove(0);
        }
    }
    let mut terms = Vec::new();
    let mut cmp = None;
    let mut sign = 1i64;
    let mut coef: Option<i64> = None;
    let mut i = 0;
    while i < tokens.len() {
        let t = tokens[i];
        let sense = match t {
            "<=" | "=<" | "<" => Some(Sense::Le),
            ">=" | "=>" | ">" => Some(Sense::Ge),
            "=" => Some(Sense::Eq),
            _ => None,
        };
        if let Some(sense) = sense {
            let rest: String = tokens[i + 1..].concat();
            let rhs: i64 = rest.parse().map_err(|_| err(format!("bad right-hand side {rest:?}")))?;
            cmp = Some((sense, rhs));
            break;
        }
        match t {
            "+" => sign = 1,
            "-" => sign = -sign,
            _ => {
                if let Ok(v) = t.parse::<i64>() {
                    coef = Some(v);
                } else if t.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') {
                    terms.push((sign * coef.unwrap_or(1), t.to_string()));
                    sign = 1;
                    coef = None;
                } else {
                    return Err(err(format!("unexpected token {t:?}")));
                }
            }
        }
        i += 1;
    }
    if coef.is_some() && cmp.is_none() {
        return Err(err("dangling coefficient".into()));
    }
    Ok(Statement { name, terms, cmp })
}

/// Parses an LP file back into a program. Variables are numbered by first
/// appearance, so compare programs with [`LinearProgram::canonical`].
pub fn parse_lp(text: &str) -> Result<LinearProgram, IlpError> {
    let mut b = Builder {
        variables: Vec::new(),
        by_name: HashMap::new(),
        declared_binary: Vec::new(),
    };
    let mut objective = Vec::new();
    let mut constraints = Vec::new();
    let mut section = Section::Preamble;
    // constraint text may span lines; it ends with its right-hand side
    let mut pending: Option<(usize, String)> = None;

    for (n, raw) in text.lines().enumerate() {
        let lineno = n + 1;
        let line = raw.split('\\').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if pending.is_none() {
            if let Some(s) = section_header(line) {
                section = s;
                continue;
            }
        }
        match section {
            Section::Preamble => {
                return Err(IlpError::Parse {
                    line: lineno,
                    message: "expected `Minimize`".into(),
                })
            }
            Section::End => break,
            Section::Objective => {
                let st = parse_statement(line, lineno)?;
                for (c, v) in st.terms {
                    let v = b.var(&v);
                    objective.push((c, v));
                }
            }
            Section::Constraints => {
                let (start, mut acc) = pending.take().unwrap_or((lineno, String::new()));
                acc.push(' ');
                acc.push_str(line);
                let st = parse_statement(&acc, start)?;
                let Some((sense, rhs)) = st.cmp else {
                    pending = Some((start, acc));
                    continue;
                };
                let name = st.name.ok_or(IlpError::Parse {
                    line: start,
                    message: "constraint without a name".into(),
                })?;
                let tag = name
                    .rsplit_once('_')
                    .and_then(|(t, _)| ConstraintTag::from_ident(t))
                    .ok_or(IlpError::Parse {
                        line: start,
                        message: format!("constraint name {name:?} carries no known tag"),
                    })?;
                let terms = st.terms.iter().map(|(c, v)| (*c, b.var(v))).collect();
                constraints.push(LinearConstraint { tag, terms, sense, rhs });
            }
            Section::Bounds => {
                let st = parse_statement(line, lineno)?;
                match (&st.terms[..], st.cmp) {
                    ([(1, v)], Some((Sense::Ge, 0))) => {
                        b.var(v);
                    }
                    _ => {
                        return Err(IlpError::Parse {
                            line: lineno,
                            message: "only `v >= 0` bounds are supported".into(),
                        })
                    }
                }
            }
            Section::Binary | Section::General => {
                for name in line.split_whitespace() {
                    let v = b.var(name);
                    b.declared_binary[v] = true;
                }
            }
        }
    }
    if let Some((line, _)) = pending {
        return Err(IlpError::Parse {
            line,
            message: "unterminated constraint".into(),
        });
    }
    for (v, bin) in b.variables.iter_mut().zip(&b.declared_binary) {
        if *bin {
            v.kind = VarKind::Binary;
        }
    }
    Ok(LinearProgram {
        variables: b.variables,
        objective,
        constraints,
    })
}

/// Program with variables referenced by name, independent of numbering.
#[derive(Debug, PartialEq, Eq)]
pub struct CanonicalProgram {
    pub variables: Vec<(String, VarKind)>,
    pub objective: Vec<(i64, String)>,
    pub constraints: Vec<(ConstraintTag, Vec<(i64, String)>, Sense, i64)>,
}

impl LinearProgram {
    pub fn canonical(&self) -> CanonicalProgram {
        let named = |terms: &[(i64, usize)]| {
            let mut t: Vec<(i64, String)> = terms
                .iter()
                .map(|&(c, v)| (c, self.variables[v].name.clone()))
                .collect();
            t.sort_by(|a, b| a.1.cmp(&b.1));
            t
        };
        let mut variables: Vec<(String, VarKind)> = self
            .variables
            .iter()
            .map(|v| (v.name.clone(), v.kind))
            .collect();
        variables.sort_by(|a, b| a.0.cmp(&b.0));
        CanonicalProgram {
            variables,
            objective: named(&self.objective),
            constraints: self
                .constraints
                .iter()
                .map(|c| (c.tag, named(&c.terms), c.sense, c.rhs))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{grid_network, NodeId};
    use crate::ilp::build_ilp_model;
    use crate::interference::{ground_truth, InterferenceMatrix};

    #[test]
    fn empty_program() {
        let lp = LinearProgram {
            variables: vec![Variable {
                name: "a".into(),
                kind: VarKind::Binary,
            }],
            objective: vec![(1, 0)],
            constraints: vec![],
        };
        let model = IlpModel {
            matrix: InterferenceMatrix::for_overlays([NodeId(1), NodeId(2)]),
            node_budget: 3,
            program: lp.clone(),
        };
        let text = export_lp(&model);
        assert!(text.contains("Minimize\n obj: a\nSubject To\nBinary\n a\nEnd\n"));
        assert!(!text.contains("Bounds"));
        assert_eq!(parse_lp(&text).unwrap().canonical(), lp.canonical());
    }

    #[test]
    fn small_model_round_trip() {
        let mut f = InterferenceMatrix::for_overlays([NodeId(1), NodeId(2), NodeId(3)]);
        f.set(0, 1, true);
        f.set(2, 5, true);
        let m = build_ilp_model(&f, 5).unwrap();
        let text = export_lp(&m);
        assert!(text.contains("Bounds\n u_0_1 >= 0\n"));
        assert!(text.contains(" - 5 xt_") || text.contains(" + 5 xt_"));
        let back = parse_lp(&text).unwrap();
        assert_eq!(back.canonical(), m.program.canonical());
    }

    #[test]
    fn grid_model_round_trip() {
        let f = ground_truth(&grid_network()).unwrap();
        let m = build_ilp_model(&f, 12).unwrap();
        let back = parse_lp(&export_lp(&m)).unwrap();
        assert_eq!(back.canonical(), m.program.canonical());
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_lp("x + y\n"), Err(IlpError::Parse { line: 1, .. })));
        let text = "Minimize\n obj: a\nSubject To\n bogus_1: a >= 1\nEnd\n";
        assert!(matches!(parse_lp(text), Err(IlpError::Parse { line: 4, .. })));
        let text = "Minimize\n obj: a\nSubject To\n flow_1: a + b\nEnd\n";
        assert!(matches!(parse_lp(text), Err(IlpError::Parse { .. })));
    }
}
