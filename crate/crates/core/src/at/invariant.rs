use crate::clia::{Body, CliaError, Cond, ExtCond, Formula, LinExpr};
use crate::qe::{eliminate, strip_modulo, DEFAULT_QE_CAP};
use crate::smt::{DefBody, FunDef, Query, SmtResult, SmtSession, Validity};
use crate::sygus::SynthProblem;

use super::graph::{build_graph, TransitionGraph};
use super::{disjoint, AtError, Branch, InvProblem};

/// Exact one-step image: `⋁_b φ(x − c_b) ∧ ψ_b(x − c_b)`.
pub fn post_image(phi: &ExtCond, branches: &[Branch]) -> ExtCond {
    Formula::or(
        branches
            .iter()
            .map(|b| {
                let back = b.translation(-1);
                Formula::and2(phi.compose(&back), b.guard_formula().compose(&back))
            })
            .collect::<Vec<_>>(),
    )
    .simplify()
}

/// States entered by a step that leaves its branch:
/// `⋁_b φ(x − c_b) ∧ ψ_b(x − c_b) ∧ ¬ψ_b(x)`.
pub fn cross_step(phi: &ExtCond, branches: &[Branch]) -> ExtCond {
    Formula::or(
        branches
            .iter()
            .map(|b| {
                let back = b.translation(-1);
                let psi = b.guard_formula();
                Formula::and(vec![phi.compose(&back), psi.compose(&back), Formula::not(psi)]).nnf_int()
            })
            .collect::<Vec<_>>(),
    )
    .simplify()
}

/// Everything reachable from `φ` without leaving a branch: for each branch
/// the points `x ∈ ψ_b` with `x − k·c_b ∈ φ ∧ ψ_b` for some `k ≥ 0`
/// (guards are convex, so the intermediate points stay in `ψ_b`), plus the
/// points of `φ` where no branch is enabled.
pub fn fast_trans(phi: &ExtCond, branches: &[Branch], nvars: usize) -> Result<ExtCond, AtError> {
    let k = nvars;
    let mut parts = Vec::with_capacity(branches.len() + 1);
    for b in branches {
        let shift = b.literal_shift().ok_or(AtError::SymbolicShift)?;
        let back: Vec<LinExpr> =
            shift.iter().enumerate().map(|(j, c)| &LinExpr::var(j) + &LinExpr::scaled_var(k, -c)).collect();
        let psi = b.guard_formula();
        let body = Formula::and2(phi.compose(&back), psi.compose(&back));
        let reached = eliminate(k, &body, true)?;
        parts.push(Formula::and2(psi, reached).simplify());
    }
    let idle = Formula::and(branches.iter().map(|b| Formula::not(b.guard_formula())).collect::<Vec<_>>());
    parts.push(Formula::and2(phi.clone(), idle).nnf_int().simplify());
    Ok(Formula::or(parts).simplify())
}

fn check_size(f: &ExtCond) -> Result<(), AtError> {
    if f.size() > DEFAULT_QE_CAP {
        return Err(CliaError::SizeLimitExceeded { what: "strongest invariant", cap: DEFAULT_QE_CAP }.into());
    }
    Ok(())
}

/// The reachable set: local closure of `pre`, then alternately a crossing
/// step and a local closure. A run crosses at most `diameter` edges between
/// branches plus one final exit to a state where no branch is enabled.
pub fn strongest_invariant(ip: &InvProblem, g: &TransitionGraph) -> Result<ExtCond, AtError> {
    let diameter = g.diameter.ok_or(AtError::Cyclic)?;
    let mut layer = fast_trans(&ip.pre, &ip.branches, ip.nvars)?;
    let mut layers = vec![layer.clone()];
    for _ in 0..=diameter {
        let crossed = cross_step(&layer, &ip.branches);
        if crossed == Formula::False {
            break;
        }
        layer = fast_trans(&crossed, &ip.branches, ip.nvars)?;
        check_size(&layer)?;
        layers.push(layer.clone());
    }
    let inv = Formula::or(layers).simplify();
    check_size(&inv)?;
    Ok(inv)
}

/// Rejects relations where two updates with different increments can fire
/// in the same state.
pub fn check_deterministic(ip: &InvProblem, s: &mut SmtSession) -> Result<(), AtError> {
    for (i, a) in ip.clauses.iter().enumerate() {
        for b in &ip.clauses[i + 1..] {
            if a.shift == b.shift || disjoint(&a.guard, &b.guard) {
                continue;
            }
            let q = Query::new(ip.names.clone()).assert(Formula::and2(a.guard_formula(), b.guard_formula()));
            match s.check_sat(&q)? {
                SmtResult::Unsat => {}
                SmtResult::Sat(_) => return Err(AtError::Nondeterministic),
                SmtResult::Unknown(r) => return Err(AtError::Inconclusive(r)),
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct AtSolution {
    pub inv: Cond,
    pub strong: ExtCond,
    pub graph: TransitionGraph,
}

/// Computes the strongest invariant, decides whether any invariant exists,
/// and returns its modulo-free weakening once that is verified too.
pub fn at_solve(p: &SynthProblem, ip: &InvProblem, s: &mut SmtSession) -> Result<AtSolution, AtError> {
    check_deterministic(ip, s)?;
    let graph = build_graph(ip, s)?;
    if !graph.is_acyclic() {
        return Err(AtError::Cyclic);
    }
    let strong = strongest_invariant(ip, &graph)?;
    let def = FunDef { name: p.fname.clone(), params: p.params.clone(), body: DefBody::Ext(strong.clone()) };
    match s.check_valid(&p.vars, &[def], &p.spec)? {
        Validity::Valid => {}
        Validity::Unknown(r) => return Err(AtError::Inconclusive(r)),
        Validity::Invalid(_) => {
            // The reachable set is the least invariant, so if it misses the
            // postcondition nothing else can satisfy it.
            return match s.check_valid_ext(&ip.names, &Formula::implies(strong.clone(), ip.post.clone()))? {
                Validity::Invalid(w) => Err(AtError::NoCliaInvariant(w)),
                Validity::Valid => Err(AtError::NotInductive),
                Validity::Unknown(r) => Err(AtError::Inconclusive(r)),
            };
        }
    }
    let inv = strip_modulo(&strong);
    match crate::verify::check_solution(p, &Body::Bool(inv.clone()), s)? {
        Validity::Valid => Ok(AtSolution { inv, strong, graph }),
        Validity::Invalid(_) => Err(AtError::ModuloNeeded),
        Validity::Unknown(r) => Err(AtError::Inconclusive(r)),
    }
}
