use std::path::PathBuf;

use num_bigint::BigInt;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use concsynth::clia::{valuation, Body, Formula, LinExpr, Term};
use concsynth::smt::{SmtConfig, SmtSession, Validity};
use concsynth::ssi::{
    extremum_cases, guard, normal_form, ssi_check_exists, ssi_normalize, ssi_synthesize, Existence, SsiOutcome,
};
use concsynth::sygus::{parse, SynthProblem};
use concsynth::verify::check_solution;

fn corpus(rel: &str) -> SynthProblem {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(rel);
    parse(&std::fs::read_to_string(&path).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn session() -> SmtSession {
    SmtSession::new(SmtConfig::for_program("z3")).expect("z3 on PATH")
}

fn one_var(constraints: &str) -> SynthProblem {
    parse(&format!(
        "(set-logic LIA)(synth-fun f ((x Int)) Int)(declare-var x Int){constraints}(check-synth)"
    ))
    .unwrap()
}

/// Whether the spec holds at `point` when every invocation returns `z`.
fn holds_with(p: &SynthProblem, point: &[i64], z: i64) -> bool {
    let fixed = p.spec.map_apps(&mut |_, _| Some(Term::int(z)), &mut |_, _| None);
    fixed.eval(&valuation(point)).unwrap()
}

fn solved(p: &SynthProblem) -> Term {
    match ssi_synthesize(p, &mut session()).unwrap() {
        SsiOutcome::Solved(Body::Int(t)) => t,
        other => panic!("expected a solution, got {other:?}"),
    }
}

#[test]
fn max2_is_the_maximum() {
    let p = corpus("ssi/fg_max2.sl");
    let t = solved(&p);
    assert_eq!(check_solution(&p, &Body::Int(t.clone()), &mut session()).unwrap(), Validity::Valid);
    for a in -6..=6 {
        for b in -6..=6 {
            assert_eq!(t.eval(&valuation(&[a, b])).unwrap(), BigInt::from(a.max(b)));
        }
    }
}

#[test]
fn small_corpus_instances_verify() {
    for n in 2..=5 {
        for name in [format!("ssi/fg_max{n}.sl"), format!("ssi/fg_array_search_{n}.sl")] {
            let p = corpus(&name);
            let t = solved(&p);
            let v = check_solution(&p, &Body::Int(t), &mut session()).unwrap();
            assert_eq!(v, Validity::Valid, "{name}");
        }
    }
}

#[test]
fn empty_interval_has_no_solution() {
    let p = one_var("(constraint (>= (f x) x))(constraint (<= (f x) (- x 1)))");
    let SsiOutcome::Unsynthesizable(w) = ssi_synthesize(&p, &mut session()).unwrap() else { panic!() };
    let x = i64::try_from(&w[0]).unwrap();
    assert!((-100..=100).all(|z| !holds_with(&p, &[x], z)));
}

#[test]
fn nonnegative_below_x_fails_for_negative_x() {
    let p = one_var("(constraint (>= (f x) 0))(constraint (<= (f x) x))");
    // The points with no admissible value, found by search.
    let blocked: Vec<i64> = (-3..=3).filter(|&x| (-10..=10).all(|z| !holds_with(&p, &[x], z))).collect();
    assert_eq!(blocked, vec![-3, -2, -1]);
    let SsiOutcome::Unsynthesizable(w) = ssi_synthesize(&p, &mut session()).unwrap() else { panic!() };
    let x = i64::try_from(&w[0]).unwrap();
    assert!(x < 0);
    assert!((-10..=10).all(|z| !holds_with(&p, &[x], z)));
}

#[test]
fn commutative_max_is_symmetric() {
    let p = corpus("ssi_comm/comm_max2.sl");
    let t = solved(&p);
    assert_eq!(check_solution(&p, &Body::Int(t.clone()), &mut session()).unwrap(), Validity::Valid);
    for a in -3..=3 {
        for b in -3..=3 {
            let ab = t.eval(&valuation(&[a, b])).unwrap();
            assert_eq!(ab, t.eval(&valuation(&[b, a])).unwrap());
            assert_eq!(ab, BigInt::from(a.max(b)));
        }
    }
}

#[test]
fn commutative_sum_body() {
    let p = corpus("ssi_comm/comm_sum.sl");
    let t = solved(&p);
    for a in -4..=4 {
        for b in -4..=4 {
            assert_eq!(t.eval(&valuation(&[a, b])).unwrap(), BigInt::from(a + b));
        }
    }
}

#[test]
fn commutative_contradiction_is_reported() {
    let p = corpus("ssi_comm/comm_unsat.sl");
    assert!(matches!(ssi_synthesize(&p, &mut session()).unwrap(), SsiOutcome::Unsynthesizable(_)));
}

fn lit(v: i64) -> String {
    if v < 0 {
        format!("(- {})", -v)
    } else {
        v.to_string()
    }
}

/// Random boolean combination of bounds on `z = f(x, y)`.
fn random_spec(rng: &mut StdRng) -> String {
    let mut atoms = Vec::new();
    for _ in 0..rng.gen_range(1..=4) {
        let (a, b, c) = (rng.gen_range(-2..=2), rng.gen_range(-2..=2), rng.gen_range(-3..=3));
        let rel = ["<=", ">=", "="][rng.gen_range(0..3)];
        atoms.push(format!("({rel} (f x y) (+ (* {} x) (* {} y) {}))", lit(a), lit(b), lit(c)));
    }
    let mut s = atoms.pop().unwrap();
    while let Some(a) = atoms.pop() {
        s = format!("({} {s} {a})", if rng.gen_bool(0.5) { "and" } else { "or" });
    }
    format!("(set-logic LIA)(synth-fun f ((x Int) (y Int)) Int)(declare-var x Int)(declare-var y Int)(constraint {s})(check-synth)")
}

#[test]
fn existence_agrees_with_candidate_substitution() {
    let mut rng = StdRng::seed_from_u64(3);
    let mut s = session();
    let mut seen = [0; 2];
    for case in 0..60 {
        let src = random_spec(&mut rng);
        let p = parse(&src).unwrap();
        let nf = normal_form(&p).unwrap();
        let by_candidates = Formula::or(nf.candidates.iter().map(|t| guard(&nf, t)).collect::<Vec<_>>());
        let blocked = (-5..=5)
            .flat_map(|x| (-5..=5).map(move |y| [x, y]))
            .find(|pt| !by_candidates.eval_at(&valuation(pt)));
        match ssi_check_exists(&nf, &p.vars, &mut s).unwrap() {
            Existence::Synthesizable => {
                seen[0] += 1;
                assert_eq!(blocked, None, "case {case}: {src}");
                let t = solved(&p);
                assert_eq!(check_solution(&p, &Body::Int(t), &mut s).unwrap(), Validity::Valid, "case {case}");
            }
            Existence::Unsynthesizable(w) => {
                seen[1] += 1;
                let pt: Vec<i64> = w.iter().map(|v| i64::try_from(v).unwrap()).collect();
                assert!(!by_candidates.eval_at(&w), "case {case}: {src}");
                assert!((-60..=60).all(|z| !holds_with(&p, &pt, z)), "case {case}: {src} at {pt:?}");
            }
        }
    }
    assert!(seen[0] > 5 && seen[1] > 5, "{seen:?}");
}

#[test]
fn extremum_cases_cover_the_plane() {
    let p = corpus("ssi/fg_max3.sl");
    let nf = ssi_normalize(&p.spec, &p.fname, 3, &[Term::var(0), Term::var(1), Term::var(2)]).unwrap();
    let cases = extremum_cases(&nf);
    assert_eq!(cases.len(), 3);
    for x in -2..=2 {
        for y in -2..=2 {
            for z in -2..=2 {
                let v = valuation(&[x, y, z]);
                let hit: Vec<&LinExpr> =
                    cases.iter().filter(|(c, _)| c.eval_at(&v)).filter_map(|(_, t)| t.as_ref()).collect();
                assert!(!hit.is_empty());
                let top = BigInt::from(x.max(y).max(z));
                assert!(hit.iter().all(|t| t.eval(&v) == top));
            }
        }
    }
}

#[test]
fn unbounded_spec_defaults_to_zero() {
    let p = one_var("(constraint (or (>= (f x) x) (<= (f x) x)))");
    let t = solved(&p);
    assert_eq!(check_solution(&p, &Body::Int(t), &mut session()).unwrap(), Validity::Valid);
}
