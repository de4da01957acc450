//! Invariant synthesis for acyclic translational loops.
//!
//! A loop is translational when every branch of its body adds a constant
//! vector to the state. For such loops the reachable set can be computed
//! exactly: within one branch by eliminating the iteration count, and across
//! branches by walking the (acyclic) branch graph.

mod graph;
mod invariant;

pub use graph::{build_graph, TransitionGraph};
pub use invariant::{at_solve, check_deterministic, cross_step, fast_trans, post_image, strongest_invariant, AtSolution};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::clia::{atomize, negate_geq, Atom, CliaError, ExtCond, Formula, LinExpr, Valuation, DEFAULT_CLAUSE_CAP};
use crate::smt::SmtError;
use crate::sygus::SynthProblem;

/// Upper bound on the number of branches produced by normalization.
pub const MAX_BRANCHES: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AtError {
    #[error("not translational: {0}")]
    NotTranslational(String),
    #[error("transition relation is nondeterministic")]
    Nondeterministic,
    #[error("transition graph is cyclic")]
    Cyclic,
    #[error("shift depends on a constant variable; acceleration needs literal shifts")]
    SymbolicShift,
    #[error("no CLIA invariant exists; the strongest invariant violates the postcondition at {0:?}")]
    NoCliaInvariant(Valuation),
    #[error("the modulo-free weakening is not an invariant")]
    ModuloNeeded,
    #[error("computed invariant failed verification")]
    NotInductive,
    #[error("SMT solver returned unknown: {0}")]
    Inconclusive(String),
    #[error(transparent)]
    Clia(#[from] CliaError),
    #[error(transparent)]
    Smt(#[from] SmtError),
}

/// One deterministic piece of the loop body: when `guard` holds the state
/// moves by `shift`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    /// Conjunction of `e ≥ 0` atoms, listed by expression.
    pub guard: Vec<LinExpr>,
    /// Per-variable increments; components may mention constant variables.
    pub shift: Vec<LinExpr>,
}

impl Branch {
    pub fn guard_formula(&self) -> ExtCond {
        Formula::and(self.guard.iter().cloned().map(ExtCond::geq).collect::<Vec<_>>())
    }

    /// Substitution `x ↦ x + sign·shift`.
    pub fn translation(&self, sign: i64) -> Vec<LinExpr> {
        let s = BigInt::from(sign);
        self.shift.iter().enumerate().map(|(j, c)| &LinExpr::var(j) + &c.scale(&s)).collect()
    }

    /// Constant shift vector, if no component is symbolic.
    pub fn literal_shift(&self) -> Option<Vec<BigInt>> {
        self.shift.iter().map(|c| c.is_constant().then(|| c.offset().clone())).collect()
    }

    pub fn holds_at(&self, x: &[BigInt]) -> bool {
        self.guard.iter().all(|e| !e.eval(x).is_negative())
    }
}

#[derive(Clone, Debug)]
pub struct InvProblem {
    pub nvars: usize,
    pub names: Vec<String>,
    pub pre: ExtCond,
    pub post: ExtCond,
    /// Pairwise disjoint branches.
    pub branches: Vec<Branch>,
    /// Branches as read off the relation, before disjointness was enforced.
    pub clauses: Vec<Branch>,
    /// Variables no branch ever changes.
    pub const_vars: Vec<usize>,
}

impl InvProblem {
    /// Index of the branch enabled at `x`.
    pub fn branch_at(&self, x: &[BigInt]) -> Option<usize> {
        self.branches.iter().position(|b| b.holds_at(x))
    }

    /// One loop iteration; `None` when no branch is enabled.
    pub fn step(&self, x: &[BigInt]) -> Option<Vec<BigInt>> {
        let b = &self.branches[self.branch_at(x)?];
        Some(x.iter().zip(&b.shift).map(|(v, c)| v + c.eval(x)).collect())
    }
}

/// Whether `e1 ≥ 0 ∧ e2 ≥ 0` is refuted by adding the two.
fn clash(e1: &LinExpr, e2: &LinExpr) -> bool {
    let sum = e1 + e2;
    sum.is_constant() && sum.offset().is_negative()
}

/// Normalizes a conjunction of `e ≥ 0` atoms; `None` when it is refuted
/// syntactically.
fn normalize_conj(atoms: impl IntoIterator<Item = LinExpr>) -> Option<Vec<LinExpr>> {
    let mut out: Vec<LinExpr> = Vec::new();
    for e in atoms {
        match Atom::Geq(e).normalize() {
            Formula::True => {}
            Formula::Atom(Atom::Geq(e)) => {
                if out.iter().any(|o| clash(o, &e)) {
                    return None;
                }
                if !out.contains(&e) {
                    out.push(e);
                }
            }
            _ => return None,
        }
    }
    out.sort();
    Some(out)
}

fn disjoint(a: &[LinExpr], b: &[LinExpr]) -> bool {
    a.iter().any(|x| b.iter().any(|y| clash(x, y)))
}

/// Reads the relation's DNF as guarded updates `x' = x + c`.
fn extract_clauses(trans: &ExtCond, n: usize) -> Result<Vec<Branch>, AtError> {
    let mut out = Vec::new();
    for clause in trans.dnf(DEFAULT_CLAUSE_CAP)? {
        let mut atoms = Vec::new();
        for lit in clause {
            match (lit.positive, lit.atom) {
                (true, Atom::Geq(e)) => atoms.push(e),
                _ => return Err(AtError::NotTranslational("congruence in the transition relation".into())),
            }
        }
        let Some(atoms) = normalize_conj(atoms) else { continue };
        let primed = |e: &LinExpr| e.vars().filter(|&v| v >= n).collect::<Vec<_>>();
        let mut shift = Vec::with_capacity(n);
        for j in 0..n {
            let eq = atoms.iter().find(|e| {
                primed(e) == [n + j] && e.coeff(n + j) == BigInt::from(1) && atoms.contains(&-*e)
            });
            let Some(e) = eq else {
                return Err(AtError::NotTranslational(format!("the update of variable {j} is not an equation")));
            };
            // x'_j + r = 0, so the increment is −r − x_j.
            let mut r = e.clone();
            r.set_coeff(n + j, BigInt::zero());
            let c = &(-&r) - &LinExpr::var(j);
            if c.vars().any(|v| v >= n) {
                return Err(AtError::NotTranslational(format!("variable {j} is updated from a primed value")));
            }
            shift.push(c);
        }
        let mut images: Vec<LinExpr> = (0..n).map(LinExpr::var).collect();
        images.extend((0..n).map(|j| &LinExpr::var(j) + &shift[j]));
        let Some(guard) = normalize_conj(atoms.iter().map(|e| e.compose(&images))) else { continue };
        let b = Branch { guard, shift };
        if !out.contains(&b) {
            out.push(b);
        }
    }
    Ok(out)
}

/// Makes guards pairwise disjoint: each clause keeps only the states no
/// earlier clause covers.
fn disjoin(clauses: &[Branch]) -> Result<Vec<Branch>, AtError> {
    let mut out: Vec<Branch> = Vec::new();
    for (k, b) in clauses.iter().enumerate() {
        let mut pieces = vec![b.guard.clone()];
        for earlier in &clauses[..k] {
            if disjoint(&earlier.guard, &b.guard) {
                continue;
            }
            let mut next = Vec::new();
            for piece in &pieces {
                // ¬(l₁ ∧ … ∧ lₘ) as the disjoint union over t of l₁ … l_{t−1} ∧ ¬l_t.
                for t in 0..earlier.guard.len() {
                    let atoms = piece.iter().cloned().chain(earlier.guard[..t].iter().cloned()).chain([negate_geq(&earlier.guard[t])]);
                    if let Some(g) = normalize_conj(atoms) {
                        next.push(g);
                    }
                }
            }
            pieces = next;
            if pieces.len() > MAX_BRANCHES {
                return Err(CliaError::SizeLimitExceeded { what: "branch normalization", cap: MAX_BRANCHES }.into());
            }
        }
        out.extend(pieces.into_iter().map(|guard| Branch { guard, shift: b.shift.clone() }));
        if out.len() > MAX_BRANCHES {
            return Err(CliaError::SizeLimitExceeded { what: "branch normalization", cap: MAX_BRANCHES }.into());
        }
    }
    Ok(out)
}

/// Normalizes an invariant problem into translational branches.
pub fn detect_translational(p: &SynthProblem) -> Result<InvProblem, AtError> {
    let Some(parts) = &p.inv_parts else {
        return Err(AtError::NotTranslational("not an invariant problem".into()));
    };
    let n = p.arity();
    let trans = atomize(&parts.trans)?.nnf_int().simplify();
    let clauses = extract_clauses(&trans, n)?;
    let const_vars: Vec<usize> = (0..n).filter(|&j| clauses.iter().all(|b| b.shift[j] == LinExpr::zero())).collect();
    for b in &clauses {
        for c in &b.shift {
            if c.vars().any(|v| !const_vars.contains(&v)) {
                return Err(AtError::NotTranslational("an increment depends on a changing variable".into()));
            }
        }
    }
    let branches = disjoin(&clauses)?;
    let pre = Formula::from_dnf(atomize(&parts.pre)?.nnf_int().simplify().dnf(DEFAULT_CLAUSE_CAP)?).simplify();
    let post = Formula::from_cnf(atomize(&parts.post)?.nnf_int().simplify().cnf(DEFAULT_CLAUSE_CAP)?).simplify();
    Ok(InvProblem { nvars: n, names: p.vars[..n].to_vec(), pre, post, branches, clauses, const_vars })
}
