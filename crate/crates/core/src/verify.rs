//! Checking candidate solutions against a specification.

use crate::clia::{Body, Cond, Formula};
use crate::smt::{DefBody, FunDef, Query, SmtError, SmtResult, SmtSession, Validity};
use crate::sygus::SynthProblem;

/// The solution as an SMT definition named after the synthesized function.
pub fn solution_def(p: &SynthProblem, body: &Body) -> FunDef {
    FunDef {
        name: p.fname.clone(),
        params: p.params.clone(),
        body: match body {
            Body::Int(t) => DefBody::Int(t.clone()),
            Body::Bool(c) => DefBody::Bool(c.clone()),
        },
    }
}

/// Validity of `∀vars. spec` with the function defined as `body`.
///
/// Single-invocation specifications are checked one extremum case at a
/// time (see [`crate::ssi::extremum_cases`]); the cases cover every input.
pub fn check_solution(p: &SynthProblem, body: &Body, s: &mut SmtSession) -> Result<Validity, SmtError> {
    let cases = match crate::ssi::normal_form(p) {
        Ok(nf) => crate::ssi::extremum_cases(&nf).into_iter().map(|(c, _)| c).collect(),
        Err(_) => vec![Formula::True],
    };
    let base = Query::new(p.vars.clone()).define(solution_def(p, body)).assert(Cond::not(p.spec.clone()));
    for case in cases {
        let q = if case == Formula::True { base.clone() } else { base.clone().assert(case) };
        match s.check_sat(&q)? {
            SmtResult::Unsat => {}
            SmtResult::Sat(m) => return Ok(Validity::Invalid(m)),
            SmtResult::Unknown(r) => return Ok(Validity::Unknown(r)),
        }
    }
    Ok(Validity::Valid)
}
