use std::fmt::Write as _;

use crate::clia::Formula;
use crate::smt::{Query, SmtResult, SmtSession};

use super::{AtError, InvProblem};

/// Which branch can hand control to which other branch in one step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionGraph {
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
    /// Longest path length in edges; `None` when the graph has a cycle.
    pub diameter: Option<usize>,
}

impl TransitionGraph {
    pub fn from_edges(nodes: usize, edges: Vec<(usize, usize)>) -> Self {
        let diameter = longest_path(nodes, &edges);
        TransitionGraph { nodes, edges, diameter }
    }

    pub fn is_acyclic(&self) -> bool {
        self.diameter.is_some()
    }

    pub fn to_dot(&self, ip: &InvProblem) -> String {
        let names = |i: usize| ip.names.get(i).cloned().unwrap_or_else(|| format!("x{i}"));
        let mut out = String::from("digraph transitions {\n");
        for (i, b) in ip.branches.iter().enumerate() {
            let guard = b.guard_formula();
            let shift: Vec<String> = b.shift.iter().map(|c| c.display_with(&names).to_string()).collect();
            let label = format!("{}\\n+({})", guard.display_with(&names), shift.join(", "));
            let _ = writeln!(out, "  b{i} [label=\"{}\"];", label.replace('"', "\\\""));
        }
        for (a, b) in &self.edges {
            let _ = writeln!(out, "  b{a} -> b{b};");
        }
        out.push_str("}\n");
        out
    }
}

/// Longest path in edges via Kahn's algorithm; `None` on a cycle.
fn longest_path(nodes: usize, edges: &[(usize, usize)]) -> Option<usize> {
    let mut indeg = vec![0usize; nodes];
    for &(_, b) in edges {
        indeg[b] += 1;
    }
    let mut depth = vec![0usize; nodes];
    let mut ready: Vec<usize> = (0..nodes).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = ready.pop() {
        seen += 1;
        for &(a, b) in edges.iter().filter(|(a, _)| *a == v) {
            depth[b] = depth[b].max(depth[a] + 1);
            indeg[b] -= 1;
            if indeg[b] == 0 {
                ready.push(b);
            }
        }
    }
    (seen == nodes).then(|| depth.into_iter().max().unwrap_or(0))
}

/// Edge `b → b'` (for `b ≠ b'`) iff `ψ_b(x) ∧ ψ_b'(x + c_b)` is satisfiable.
/// An unknown answer keeps the edge.
pub fn build_graph(ip: &InvProblem, s: &mut SmtSession) -> Result<TransitionGraph, AtError> {
    let mut edges = Vec::new();
    for (i, b) in ip.branches.iter().enumerate() {
        let moved = b.translation(1);
        for (j, target) in ip.branches.iter().enumerate() {
            if i == j {
                continue;
            }
            let q = Query::new(ip.names.clone())
                .assert(Formula::and2(b.guard_formula(), target.guard_formula().compose(&moved)));
            match s.check_sat(&q)? {
                SmtResult::Unsat => {}
                SmtResult::Sat(_) => edges.push((i, j)),
                SmtResult::Unknown(r) => {
                    log::warn!("edge b{i} -> b{j} kept after unknown answer: {r}");
                    edges.push((i, j));
                }
            }
        }
    }
    Ok(TransitionGraph::from_edges(ip.branches.len(), edges))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diameters() {
        assert_eq!(longest_path(1, &[]), Some(0));
        assert_eq!(longest_path(3, &[(0, 1), (1, 2), (0, 2)]), Some(2));
        assert_eq!(longest_path(2, &[(0, 1), (1, 0)]), None);
    }
}
