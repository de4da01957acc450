use std::sync::atomic::AtomicBool;
use std::sync::Arc;
use std::time::Duration;

use concsynth::clia::{valuation, Atom, ExtCond, Formula, LinExpr};
use concsynth::smt::{DefBody, FunDef, Query, SmtConfig, SmtError, SmtResult, SmtSession, Validity};
use concsynth::{Cond, Term};

fn session() -> SmtSession {
    SmtSession::new(SmtConfig::for_program("z3")).expect("z3 on PATH")
}

fn x() -> Term {
    Term::var(0)
}

#[test]
fn contradiction_is_unsat() {
    let q = Query::new(vec!["x".into()])
        .assert(Cond::geq(x(), Term::int(1)))
        .assert(Cond::not(Cond::geq(x(), Term::int(0))));
    assert_eq!(session().check_sat(&q).unwrap(), SmtResult::Unsat);
}

#[test]
fn forced_model() {
    let q = Query::new(vec!["x".into()]).assert(Cond::geq(x(), Term::int(3))).assert(Cond::leq(x(), Term::int(3)));
    assert_eq!(session().check_sat(&q).unwrap(), SmtResult::Sat(valuation(&[3])));
}

#[test]
fn modulo_model_matches_brute_force() {
    let odd = Formula::Atom(Atom::modulo(LinExpr::var(0), 2, 1));
    let range = ExtCond::and2(ExtCond::geq(LinExpr::from_i64s(&[1], -10)), ExtCond::geq(LinExpr::from_i64s(&[-1], 11)));
    let f = ExtCond::and2(odd, range);
    let expected: Vec<i64> = (10..=11).filter(|v| v % 2 == 1).collect();
    let q = Query::new(vec!["x".into()]).assert(f);
    assert_eq!(session().check_sat(&q).unwrap(), SmtResult::Sat(valuation(&expected)));
}

fn max2_spec(body: Term) -> (Vec<String>, Vec<FunDef>, Cond) {
    let def = FunDef { name: "f".into(), params: vec!["a".into(), "b".into()], body: DefBody::Int(body) };
    let f = Term::app(&"f".into(), vec![Term::var(0), Term::var(1)]);
    let spec = Cond::and_all([
        Cond::geq(f.clone(), Term::var(0)),
        Cond::geq(f.clone(), Term::var(1)),
        Cond::or(Cond::eq(f.clone(), Term::var(0)), Cond::eq(f, Term::var(1))),
    ]);
    (vec!["x1".into(), "x2".into()], vec![def], spec)
}

#[test]
fn max2_solution_is_valid() {
    let body = Term::ite(Cond::geq(Term::sub(Term::var(0), Term::var(1)), Term::int(0)), Term::var(0), Term::var(1));
    let (syms, defs, spec) = max2_spec(body);
    assert_eq!(session().check_valid(&syms, &defs, &spec).unwrap(), Validity::Valid);
}

#[test]
fn zero_candidate_has_checkable_witness() {
    let (syms, defs, spec) = max2_spec(Term::int(0));
    let Validity::Invalid(w) = session().check_valid(&syms, &defs, &spec).unwrap() else { panic!("expected invalid") };
    let (a, b) = (&w[0], &w[1]);
    let max = if a >= b { a } else { b };
    assert_ne!(*max, 0.into(), "witness {w:?} does not refute the zero candidate");
}

#[test]
fn tautology_is_valid() {
    let mut s = session();
    assert_eq!(s.check_valid(&[], &[], &Cond::geq(Term::int(1), Term::int(0))).unwrap(), Validity::Valid);
    // The session stays usable across queries.
    assert_eq!(s.check_valid(&[], &[], &Cond::geq(Term::int(0), Term::int(1))).unwrap(), Validity::Invalid(vec![]));
    assert_eq!(s.query_count(), 2);
}

#[test]
fn missing_solver_is_a_spawn_error() {
    let err = SmtSession::new(SmtConfig::for_program("/nonexistent/solver")).err().unwrap();
    assert!(matches!(err, SmtError::Spawn { .. }));
}

#[test]
fn crashing_solver_is_a_protocol_error_and_recovers() {
    // `false` exits immediately; the query must fail rather than hang.
    let mut cfg = SmtConfig::for_program("false");
    cfg.timeout = Some(Duration::from_secs(5));
    let mut s = SmtSession::new(cfg).unwrap();
    let q = Query::new(vec![]).assert(Cond::True);
    assert!(matches!(s.check_sat(&q), Err(SmtError::Protocol(_))));
    assert!(matches!(s.check_sat(&q), Err(SmtError::Protocol(_))));
}

#[test]
fn timeout_maps_to_unknown() {
    // `sleep` reads nothing and never answers.
    let mut cfg = SmtConfig::for_program("sleep");
    cfg.args = vec!["30".into()];
    cfg.timeout = Some(Duration::from_millis(200));
    let mut s = SmtSession::new(cfg).unwrap();
    let r = s.check_sat(&Query::new(vec![]).assert(Cond::True)).unwrap();
    assert!(matches!(r, SmtResult::Unknown(_)));
}

#[test]
fn cancellation_aborts_a_query() {
    let flag = Arc::new(AtomicBool::new(true));
    let mut cfg = SmtConfig::for_program("sleep");
    cfg.args = vec!["30".into()];
    let mut s = SmtSession::new(cfg).unwrap().with_cancel(flag);
    assert_eq!(s.check_sat(&Query::new(vec![]).assert(Cond::True)), Err(SmtError::Cancelled));
}

#[test]
fn symbols_needing_quotes_round_trip() {
    let q = Query::new(vec!["x!".into(), "a b".into()])
        .assert(Cond::eq(Term::var(0), Term::int(-4)))
        .assert(Cond::eq(Term::var(1), Term::add(Term::var(0), Term::int(1))));
    assert_eq!(session().check_sat(&q).unwrap(), SmtResult::Sat(valuation(&[-4, -3])));
}
