//! Decision procedure for strong-single-invocation specifications.
//!
//! Replacing the single invocation `f(x⃗)` by a fresh `z` turns the problem
//! into `∀x⃗ ∃z φ(z; x⃗)`. Every atom then bounds `z` from below or above,
//! so whenever some `z` exists, one of the bound terms (or `0`, when `φ`
//! does not constrain `z` at all) is a witness. The solution tries the
//! candidates in order.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::clia::{atomize, Atom, Body, CliaError, Cond, ExtCond, Formula, LinExpr, Term, Valuation};
use crate::smt::{Query, SmtError, SmtResult, SmtSession, Validity};
use crate::sygus::{split_commutative, ssi_invocation, Sort, SynthProblem};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SsiError {
    #[error("specification is not single-invocation")]
    NotSsi,
    #[error("the invocation's coefficient is not ±1 in `{0}`")]
    NonUnitCoefficient(String),
    #[error("invocation arguments must be distinct variables covering the specification: {0}")]
    UnsupportedArguments(String),
    #[error("only Int-valued functions are handled")]
    BoolValued,
    #[error(transparent)]
    Clia(#[from] CliaError),
    #[error(transparent)]
    Smt(#[from] SmtError),
    #[error("SMT solver returned unknown: {0}")]
    Inconclusive(String),
    #[error("constructed solution failed verification")]
    Unsound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Lower,
    Upper,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SsiNormalForm {
    /// Number of universal variables; `z` is variable `nvars`.
    pub nvars: usize,
    /// `φ(z; x⃗)` in negation normal form over inequality atoms.
    pub phi: ExtCond,
    /// `z ≥ t` (Lower) or `z ≤ t` (Upper) for every atom mentioning `z`.
    pub atoms: Vec<(Direction, LinExpr)>,
    /// Candidate terms in trial order; the default `0` is last.
    pub candidates: Vec<LinExpr>,
    /// `args[j]` is the variable passed as the `j`-th argument.
    pub args: Vec<usize>,
}

impl SsiNormalForm {
    pub fn z(&self) -> usize {
        self.nvars
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Existence {
    Synthesizable,
    /// A point `x⃗` for which no value of `f(x⃗)` satisfies the specification.
    Unsynthesizable(Valuation),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SsiOutcome {
    Solved(Body),
    Unsynthesizable(Valuation),
}

fn arg_vars(args: &[Term], spec: &Cond, nvars: usize) -> Result<Vec<usize>, SsiError> {
    let mut vars = Vec::new();
    for a in args {
        match a {
            Term::Var(i) if !vars.contains(i) => vars.push(*i),
            other => return Err(SsiError::UnsupportedArguments(format!("argument `{other}`"))),
        }
    }
    let mut used = Vec::new();
    spec.collect_vars(&mut used);
    if let Some(v) = used.iter().find(|v| !vars.contains(v) && **v < nvars) {
        return Err(SsiError::UnsupportedArguments(format!("variable x{v} is not an argument")));
    }
    Ok(vars)
}

/// Rewrites `spec` over `z := f(args)` into bound form.
pub fn ssi_normalize(spec: &Cond, fname: &str, nvars: usize, args: &[Term]) -> Result<SsiNormalForm, SsiError> {
    let args = arg_vars(args, spec, nvars)?;
    let z = nvars;
    let with_z = spec.map_apps(
        &mut |g, _| (&**g == fname).then_some(Term::Var(z)),
        &mut |_, _| None,
    );
    if with_z.count_apps(fname) > 0 {
        return Err(SsiError::NotSsi);
    }
    let phi = atomize(&with_z)?.nnf_int().simplify();

    let mut atoms = Vec::new();
    let mut bad = None;
    phi.visit_atoms(&mut |a| {
        let c = a.expr().coeff(z);
        if c.is_zero() {
            return;
        }
        match a {
            Atom::Geq(e) if c.abs().is_one() => {
                let mut t = e.clone();
                t.set_coeff(z, BigInt::zero());
                atoms.push(if c.is_positive() { (Direction::Lower, -&t) } else { (Direction::Upper, t) });
            }
            _ => bad = Some(a.clone()),
        }
    });
    if let Some(a) = bad {
        let shown = Formula::Atom(a).to_string();
        return Err(SsiError::NonUnitCoefficient(shown));
    }

    let mut candidates: Vec<LinExpr> = Vec::new();
    for dir in [Direction::Lower, Direction::Upper] {
        for (d, t) in &atoms {
            if *d == dir && !candidates.contains(t) {
                candidates.push(t.clone());
            }
        }
    }
    if !candidates.contains(&LinExpr::zero()) {
        candidates.push(LinExpr::zero());
    }
    Ok(SsiNormalForm { nvars, phi, atoms, candidates, args })
}

/// `φ(t; x⃗)` as a plain condition.
pub fn guard(nf: &SsiNormalForm, t: &LinExpr) -> ExtCond {
    nf.phi.substitute(nf.z(), t).simplify()
}

/// A cover of the input space by which bound term is extreme: for each
/// distinct lower-bound term `t_k`, the case `⋀_i t_k ≥ t_i` (upper-bound
/// terms and `≤` when there are no lower bounds). Each case comes with its
/// extreme term.
pub fn extremum_cases(nf: &SsiNormalForm) -> Vec<(ExtCond, Option<LinExpr>)> {
    let pick = |dir| {
        let mut ts: Vec<&LinExpr> = Vec::new();
        for (d, t) in &nf.atoms {
            if *d == dir && !ts.contains(&t) {
                ts.push(t);
            }
        }
        ts
    };
    let (terms, dir) = match pick(Direction::Lower) {
        ts if ts.is_empty() => (pick(Direction::Upper), Direction::Upper),
        ts => (ts, Direction::Lower),
    };
    if terms.len() < 2 {
        return vec![(Formula::True, terms.first().map(|t| (*t).clone()))];
    }
    terms
        .iter()
        .map(|tk| {
            let case = terms
                .iter()
                .filter(|t| *t != tk)
                .map(|t| ExtCond::geq(if dir == Direction::Lower { *tk - *t } else { *t - *tk }))
                .collect::<Vec<_>>();
            (Formula::and(case), Some((*tk).clone()))
        })
        .collect()
}

/// Decides `∀x⃗ ∃z φ` by eliminating `z` and checking the negation.
pub fn ssi_check_exists(nf: &SsiNormalForm, names: &[String], s: &mut SmtSession) -> Result<Existence, SsiError> {
    let gamma = crate::qe::eliminate(nf.z(), &nf.phi, false)?;
    for (case, extreme) in extremum_cases(nf) {
        let mut q = Query::new(names.to_vec()).assert(Formula::not(gamma.clone())).assert(case);
        // Implied by ¬γ, as every bound term is a candidate.
        if let Some(t) = extreme {
            q = q.assert(Formula::not(guard(nf, &t)));
        }
        match s.check_sat(&q)? {
            SmtResult::Unsat => {}
            SmtResult::Sat(w) => return Ok(Existence::Unsynthesizable(w)),
            SmtResult::Unknown(r) => return Err(SsiError::Inconclusive(r)),
        }
    }
    Ok(Existence::Synthesizable)
}

/// `ite(φ(t₁), t₁, ite(φ(t₂), t₂, … 0))` over the function's parameters.
pub fn ssi_solve(nf: &SsiNormalForm) -> Result<Term, SsiError> {
    let mut branches = Vec::new();
    for t in &nf.candidates {
        let g = guard(nf, t);
        match g {
            Formula::False => continue,
            Formula::True => {
                branches.push((Cond::True, t.clone()));
                break;
            }
            g => branches.push((g.to_cond_pretty()?, t.clone())),
        }
    }
    let mut body = match branches.last() {
        Some((Cond::True, t)) => {
            let t = t.to_term();
            branches.pop();
            t
        }
        _ => Term::int(0),
    };
    for (g, t) in branches.into_iter().rev() {
        body = Term::ite(g, t.to_term(), body);
    }
    let mut images: Vec<Term> = (0..nf.nvars).map(|_| Term::int(0)).collect();
    for (j, v) in nf.args.iter().enumerate() {
        images[*v] = Term::Var(j);
    }
    Ok(body.subst_vars(&images).simplify())
}

/// Full SSI pipeline for a problem, including the commutative variant.
pub fn ssi_synthesize(p: &SynthProblem, s: &mut SmtSession) -> Result<SsiOutcome, SsiError> {
    if p.ret != Sort::Int {
        return Err(SsiError::BoolValued);
    }
    let outcome = if let Some(args) = ssi_invocation(&p.spec, &p.fname) {
        let nf = ssi_normalize(&p.spec, &p.fname, p.vars.len(), &args)?;
        match ssi_check_exists(&nf, &p.vars, s)? {
            Existence::Unsynthesizable(w) => SsiOutcome::Unsynthesizable(w),
            Existence::Synthesizable => SsiOutcome::Solved(Body::Int(ssi_solve(&nf)?)),
        }
    } else {
        ssi_commutative(p, s)?
    };
    if let SsiOutcome::Solved(body) = &outcome {
        match crate::verify::check_solution(p, body, s)? {
            Validity::Valid => {}
            Validity::Invalid(_) => return Err(SsiError::Unsound),
            Validity::Unknown(r) => return Err(SsiError::Inconclusive(r)),
        }
    }
    Ok(outcome)
}

/// Normal form of the problem, for inspecting the candidate list.
pub fn normal_form(p: &SynthProblem) -> Result<SsiNormalForm, SsiError> {
    if let Some(args) = ssi_invocation(&p.spec, &p.fname) {
        return ssi_normalize(&p.spec, &p.fname, p.vars.len(), &args);
    }
    let (spec, args) = commutative_g_spec(p)?;
    ssi_normalize(&spec, &p.fname, p.vars.len(), &args)
}

/// The specification for `g` with `f(x_a, x_b) = ite(x_a ≥ x_b, g(x_a, x_b), g(x_b, x_a))`:
/// on `x_a ≥ x_b`, `g(x_a, x_b)` must satisfy the remainder both as
/// written and with the arguments swapped.
fn commutative_g_spec(p: &SynthProblem) -> Result<(Cond, Vec<Term>), SsiError> {
    let c = split_commutative(p).ok_or(SsiError::NotSsi)?;
    let (a, b) = (c.a, c.b);
    let mut swap: Vec<Term> = (0..p.vars.len()).map(Term::Var).collect();
    swap.swap(a, b);
    let f = p.fname.as_str();
    let straight_args = vec![Term::Var(a), Term::Var(b)];
    let swapped = c.rest.subst_vars(&swap).map_apps(
        &mut |g, _| (&**g == f).then(|| Term::App(g.clone(), straight_args.clone())),
        &mut |_, _| None,
    );
    let ordered = Cond::geq(Term::Var(a), Term::Var(b));
    let spec = Cond::and(Cond::implies(ordered.clone(), c.rest), Cond::implies(ordered, swapped));
    Ok((spec, straight_args))
}

pub fn ssi_commutative(p: &SynthProblem, s: &mut SmtSession) -> Result<SsiOutcome, SsiError> {
    let (spec, args) = commutative_g_spec(p)?;
    let nf = ssi_normalize(&spec, &p.fname, p.vars.len(), &args)?;
    if let Existence::Unsynthesizable(w) = ssi_check_exists(&nf, &p.vars, s)? {
        return Ok(SsiOutcome::Unsynthesizable(w));
    }
    let g = ssi_solve(&nf)?;
    let swapped = g.subst_vars(&[Term::Var(1), Term::Var(0)]);
    let body = Term::ite(Cond::geq(Term::Var(0), Term::Var(1)), g, swapped).simplify();
    Ok(SsiOutcome::Solved(Body::Int(body)))
}
