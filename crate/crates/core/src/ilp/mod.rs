//! The integer program whose optimum is the smallest network producing a
//! given interference matrix.
//!
//! Nodes of the candidate network are numbered `1..=N`; the first `|O|`
//! are the overlays in ascending label order. Variables:
//!
//! * `xt_{l}_{i}_{j}` — tunnel `l` uses directed link `(i, j)` (binary)
//! * `x_{i}_{j}`, `i < j` — undirected edge `{i, j}` is present (binary)
//! * `u_{l}_{i}` — position of node `i` along tunnel `l` (continuous, ≥ 0)
//! * `y_{k}_{l}_{i}_{j}` — interfering tunnels `k < l` both use `(i, j)`
//!   (binary)

mod lp;
mod solution;
mod solve;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::RecoveredGraph;
use crate::graph::NodeId;
use crate::interference::InterferenceMatrix;

pub use lp::{export_lp, parse_lp};
pub use solution::{import_solution, parse_solution_values, write_solution};
pub use solve::{solve_exact_small, SolveLimits};

#[derive(Debug, Error)]
pub enum IlpError {
    #[error("node budget {budget} is below the minimum {minimum}")]
    BudgetTooSmall { budget: usize, minimum: usize },
    #[error("lp file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("solution: {0}")]
    Solution(String),
    #[error("instance exceeds solver limits: {0}")]
    LimitsExceeded(String),
    #[error("no network with at most {node_budget} nodes produces this matrix")]
    Infeasible { node_budget: usize },
    #[error("time budget exhausted before optimality was proven")]
    TimeBudgetExceeded { incumbent: Box<Option<RecoveredGraph>> },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Binary,
    /// Continuous with lower bound 0 and no upper bound.
    NonNegative,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConstraintTag {
    EdgeOr,
    OverlayDegree,
    Flow,
    Mtz,
    NoShare,
    MustShare,
}

impl ConstraintTag {
    pub const ALL: [ConstraintTag; 6] = [
        ConstraintTag::EdgeOr,
        ConstraintTag::OverlayDegree,
        ConstraintTag::Flow,
        ConstraintTag::Mtz,
        ConstraintTag::NoShare,
        ConstraintTag::MustShare,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConstraintTag::EdgeOr => "edge-or",
            ConstraintTag::OverlayDegree => "overlay-degree",
            ConstraintTag::Flow => "flow",
            ConstraintTag::Mtz => "mtz",
            ConstraintTag::NoShare => "no-share",
            ConstraintTag::MustShare => "must-share",
        }
    }

    /// Form used inside LP constraint names, which may not contain `-`.
    fn ident(self) -> &'static str {
        match self {
            ConstraintTag::EdgeOr => "edge_or",
            ConstraintTag::OverlayDegree => "overlay_degree",
            ConstraintTag::Flow => "flow",
            ConstraintTag::Mtz => "mtz",
            ConstraintTag::NoShare => "no_share",
            ConstraintTag::MustShare => "must_share",
        }
    }

    fn from_ident(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.ident() == s)
    }
}

impl fmt::Display for ConstraintTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub tag: ConstraintTag,
    /// `(coefficient, variable index)`
    pub terms: Vec<(i64, usize)>,
    pub sense: Sense,
    pub rhs: i64,
}

/// Solver-neutral linear program: minimise the objective subject to the
/// constraints.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub variables: Vec<Variable>,
    pub objective: Vec<(i64, usize)>,
    pub constraints: Vec<LinearConstraint>,
}

impl LinearProgram {
    pub fn count(&self, tag: ConstraintTag) -> usize {
        self.constraints.iter().filter(|c| c.tag == tag).count()
    }

    pub fn count_vars(&self, prefix: &str) -> usize {
        self.variables
            .iter()
            .filter(|v| v.name.split('_').next() == Some(prefix))
            .count()
    }

    fn add_var(&mut self, name: String, kind: VarKind) -> usize {
        self.variables.push(Variable { name, kind });
        self.variables.len() - 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IlpModel {
    pub matrix: InterferenceMatrix,
    pub node_budget: usize,
    pub program: LinearProgram,
}

impl IlpModel {
    pub fn overlay_count(&self) -> usize {
        self.matrix.overlays().len()
    }

    /// Network node id for model node `i` (1-based). Overlays map to their
    /// labels; other nodes are numbered above the largest overlay label.
    pub fn node_id(&self, i: usize) -> NodeId {
        node_id(&self.matrix, i)
    }

    /// Model node for a network node id, if it is within the budget.
    pub fn model_node(&self, id: NodeId) -> Option<usize> {
        let k = self.overlay_count();
        if let Some(r) = self.matrix.index().rank(id) {
            return Some(r + 1);
        }
        let base = max_label(&self.matrix);
        let i = (id.0.checked_sub(base)? as usize) + k;
        (id.0 > base && i <= self.node_budget).then_some(i)
    }
}

fn max_label(f: &InterferenceMatrix) -> u32 {
    f.overlays().iter().map(|o| o.0).max().unwrap_or(0)
}

fn node_id(f: &InterferenceMatrix, i: usize) -> NodeId {
    let k = f.overlays().len();
    if i <= k {
        f.overlays()[i - 1]
    } else {
        NodeId(max_label(f) + (i - k) as u32)
    }
}

/// Node budget used when none is given: `|O| + max(1, |O|)`.
pub fn default_node_budget(overlay_count: usize) -> usize {
    overlay_count + overlay_count.max(1)
}

/// Builds the program with every logical constraint linearised:
///
/// * OR: `x_ij ≥ xt_l_ij`, `x_ij ≥ xt_l_ji` for every `l`, and
///   `x_ij ≤ Σ_l (xt_l_ij + xt_l_ji)`
/// * AND: `y ≤ xt_k`, `y ≤ xt_l`, `y ≥ xt_k + xt_l − 1`, and `Σ y ≥ 1`
pub fn build_ilp_model(f: &InterferenceMatrix, node_budget: usize) -> Result<IlpModel, IlpError> {
    let k = f.overlays().len();
    let n = node_budget;
    if n < k + 1 {
        return Err(IlpError::BudgetTooSmall {
            budget: n,
            minimum: k + 1,
        });
    }
    let tunnels = f.len();
    let mut lp = LinearProgram::default();

    // xt[l][i][j], 1-based nodes, usize::MAX on the diagonal
    let mut xt = vec![vec![vec![usize::MAX; n + 1]; n + 1]; tunnels];
    for (l, plane) in xt.iter_mut().enumerate() {
        for (i, row) in plane.iter_mut().enumerate().skip(1) {
            for (j, slot) in row.iter_mut().enumerate().skip(1) {
                if i != j {
                    *slot = lp.add_var(format!("xt_{l}_{i}_{j}"), VarKind::Binary);
                }
            }
        }
    }
    let mut x = vec![vec![usize::MAX; n + 1]; n + 1];
    for i in 1..=n {
        for j in i + 1..=n {
            let v = lp.add_var(format!("x_{i}_{j}"), VarKind::Binary);
            x[i][j] = v;
            x[j][i] = v;
        }
    }
    let mut u = vec![vec![usize::MAX; n + 1]; tunnels];
    for (l, row) in u.iter_mut().enumerate() {
        for (i, slot) in row.iter_mut().enumerate().skip(1) {
            *slot = lp.add_var(format!("u_{l}_{i}"), VarKind::NonNegative);
        }
    }
    lp.objective = (1..=n)
        .flat_map(|i| (i + 1..=n).map(move |j| (i, j)))
        .map(|(i, j)| (1, x[i][j]))
        .collect();

    let push = |lp: &mut LinearProgram, tag, terms, sense, rhs| {
        lp.constraints.push(LinearConstraint { tag, terms, sense, rhs });
    };

    for i in 1..=n {
        for j in i + 1..=n {
            let mut any = vec![(1, x[i][j])];
            for plane in &xt {
                push(&mut lp, ConstraintTag::EdgeOr, vec![(1, x[i][j]), (-1, plane[i][j])], Sense::Ge, 0);
                push(&mut lp, ConstraintTag::EdgeOr, vec![(1, x[i][j]), (-1, plane[j][i])], Sense::Ge, 0);
                any.push((-1, plane[i][j]));
                any.push((-1, plane[j][i]));
            }
            push(&mut lp, ConstraintTag::EdgeOr, any, Sense::Le, 0);
        }
    }

    for i in 1..=k {
        let terms = (1..=n).filter(|&j| j != i).map(|j| (1, x[i][j])).collect();
        push(&mut lp, ConstraintTag::OverlayDegree, terms, Sense::Eq, 1);
    }

    for (l, plane) in xt.iter().enumerate() {
        let (s, d) = f.index().pair(l);
        let s = f.index().rank(s).expect("overlay") + 1;
        let d = f.index().rank(d).expect("overlay") + 1;
        for j in 1..=n {
            // in(j) + s(l,j) = out(j) + d(l,j)
            let mut terms = Vec::with_capacity(2 * (n - 1));
            for i in (1..=n).filter(|&i| i != j) {
                terms.push((1, plane[i][j]));
            }
            for i in (1..=n).filter(|&i| i != j) {
                terms.push((-1, plane[j][i]));
            }
            let rhs = i64::from(j == d) - i64::from(j == s);
            push(&mut lp, ConstraintTag::Flow, terms, Sense::Eq, rhs);
        }
    }

    let big = n as i64;
    for (l, plane) in xt.iter().enumerate() {
        for i in 1..=n {
            for j in (1..=n).filter(|&j| j != i) {
                push(
                    &mut lp,
                    ConstraintTag::Mtz,
                    vec![(1, u[l][i]), (-1, u[l][j]), (big, plane[i][j])],
                    Sense::Le,
                    big - 1,
                );
            }
        }
    }

    for a in 0..tunnels {
        for b in a + 1..tunnels {
            if f.get(a, b) {
                continue;
            }
            for i in 1..=n {
                for j in (1..=n).filter(|&j| j != i) {
                    push(
                        &mut lp,
                        ConstraintTag::NoShare,
                        vec![(1, xt[a][i][j]), (1, xt[b][i][j])],
                        Sense::Le,
                        1,
                    );
                }
            }
        }
    }

    for (a, b) in f.interfering_pairs() {
        let mut sum = Vec::with_capacity(n * (n - 1));
        for i in 1..=n {
            for j in (1..=n).filter(|&j| j != i) {
                let y = lp.add_var(format!("y_{a}_{b}_{i}_{j}"), VarKind::Binary);
                push(&mut lp, ConstraintTag::MustShare, vec![(1, y), (-1, xt[a][i][j])], Sense::Le, 0);
                push(&mut lp, ConstraintTag::MustShare, vec![(1, y), (-1, xt[b][i][j])], Sense::Le, 0);
                push(
                    &mut lp,
                    ConstraintTag::MustShare,
                    vec![(1, y), (-1, xt[a][i][j]), (-1, xt[b][i][j])],
                    Sense::Ge,
                    -1,
                );
                sum.push((1, y));
            }
        }
        push(&mut lp, ConstraintTag::MustShare, sum, Sense::Ge, 1);
    }

    Ok(IlpModel {
        matrix: f.clone(),
        node_budget,
        program: lp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::grid_network;
    use crate::interference::ground_truth;

    fn two_overlays() -> InterferenceMatrix {
        InterferenceMatrix::for_overlays([NodeId(1), NodeId(2)])
    }

    #[test]
    fn budget_check() {
        assert!(matches!(
            build_ilp_model(&two_overlays(), 2),
            Err(IlpError::BudgetTooSmall { budget: 2, minimum: 3 })
        ));
        assert_eq!(default_node_budget(6), 12);
    }

    #[test]
    fn structure_of_two_overlay_model() {
        let m = build_ilp_model(&two_overlays(), 3).unwrap();
        let lp = &m.program;
        assert_eq!(lp.count_vars("xt"), 2 * 3 * 2);
        assert_eq!(lp.count_vars("x"), 3);
        assert_eq!(lp.count_vars("u"), 2 * 3);
        assert_eq!(lp.count_vars("y"), 0);
        assert_eq!(lp.count(ConstraintTag::MustShare), 0);
        // one pair, six directed links
        assert_eq!(lp.count(ConstraintTag::NoShare), 6);
        assert_eq!(lp.count(ConstraintTag::OverlayDegree), 2);
        assert_eq!(lp.count(ConstraintTag::Flow), 2 * 3);
        assert_eq!(lp.count(ConstraintTag::Mtz), 2 * 3 * 2);
        assert_eq!(lp.count(ConstraintTag::EdgeOr), 3 * (2 * 2 + 1));
        assert!(!lp.variables.iter().any(|v| {
            let p: Vec<&str> = v.name.split('_').collect();
            p[0] == "xt" && p[2] == p[3]
        }));
    }

    #[test]
    fn one_interfering_pair_gives_one_group() {
        let mut f = two_overlays();
        f.set(0, 1, true);
        let m = build_ilp_model(&f, 3).unwrap();
        let sums = m
            .program
            .constraints
            .iter()
            .filter(|c| c.tag == ConstraintTag::MustShare && c.sense == Sense::Ge && c.rhs == 1)
            .count();
        assert_eq!(sums, 1);
        assert_eq!(m.program.count(ConstraintTag::NoShare), 0);
    }

    #[test]
    fn grid_model_counts() {
        let f = ground_truth(&grid_network()).unwrap();
        let m = build_ilp_model(&f, 12).unwrap();
        let lp = &m.program;
        let (l, n) = (30, 12);
        let pairs = f.interfering_pair_count();
        assert_eq!(lp.count_vars("xt"), l * n * (n - 1));
        assert_eq!(lp.count_vars("x"), n * (n - 1) / 2);
        assert_eq!(lp.count_vars("u"), l * n);
        assert_eq!(lp.count_vars("y"), pairs * n * (n - 1));
        assert_eq!(lp.count(ConstraintTag::NoShare), (l * (l - 1) / 2 - pairs) * n * (n - 1));
        assert_eq!(lp.count(ConstraintTag::MustShare), pairs * (3 * n * (n - 1) + 1));
        assert_eq!(m.node_id(7), NodeId(7));
        assert_eq!(m.model_node(NodeId(12)), Some(12));
        assert_eq!(m.model_node(NodeId(13)), None);
    }
}
