use std::sync::atomic::AtomicBool;
use std::time::Duration;

use num_bigint::BigInt;

use concsynth::clia::TreeValue;
use concsynth::concolic::{concolic_synth, fixed_height_synth, CexStore, ConcolicError, ConcolicOptions, ConcolicStats, HeightOutcome};
use concsynth::smt::{SmtConfig, SmtSession};
use concsynth::sygus::parse;

const MAX2: &str = "(set-logic LIA)
(synth-fun max2 ((x Int) (y Int)) Int)
(declare-var x Int) (declare-var y Int)
(constraint (>= (max2 x y) x))
(constraint (>= (max2 x y) y))
(constraint (or (= x (max2 x y)) (= y (max2 x y))))
(check-synth)";

const DOUBLE: &str = "(set-logic LIA)
(synth-fun f ((x Int)) Int)
(declare-var x Int)
(constraint (= (+ (f x) (f x)) (* 4 x)))
(check-synth)";

fn session() -> SmtSession {
    SmtSession::new(SmtConfig::for_program("z3")).expect("z3 on PATH")
}

fn b(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

#[test]
fn max2_has_no_height_one_solution() {
    let p = parse(MAX2).unwrap();
    let mut store = CexStore::new();
    let mut stats = ConcolicStats::default();
    let r = fixed_height_synth(&p, 1, &mut store, &mut session(), None, Some(1), &AtomicBool::new(false), &mut stats).unwrap();
    assert_eq!(r, HeightOutcome::NoSolutionAtHeight);
    assert!(!store.is_empty());
}

#[test]
fn max2_solved_at_height_two() {
    let p = parse(MAX2).unwrap();
    let r = concolic_synth(&p, &ConcolicOptions::default()).unwrap();
    assert_eq!(r.tree.height(), 2);
    for x in -8..=8 {
        for y in -8..=8 {
            assert_eq!(r.tree.eval(&b(&[x, y])), TreeValue::Int(BigInt::from(x.max(y))));
        }
    }
    assert_eq!(r.stats.heights[0], (1, "no-solution".to_string()));
}

#[test]
fn repeated_application_is_shared() {
    let p = parse(DOUBLE).unwrap();
    let r = concolic_synth(&p, &ConcolicOptions::default()).unwrap();
    assert_eq!(r.tree.height(), 1);
    for x in -10..=10 {
        assert_eq!(r.tree.eval(&b(&[x])), TreeValue::Int(BigInt::from(2 * x)));
    }
}

#[test]
fn every_counterexample_refuted_its_candidate() {
    let p = parse(MAX2).unwrap();
    let mut store = CexStore::new();
    let mut s = session();
    let cancel = AtomicBool::new(false);
    let mut stats = ConcolicStats::default();
    for h in 1..=2 {
        fixed_height_synth(&p, h, &mut store, &mut s, None, Some(1), &cancel, &mut stats).unwrap();
    }
    for (e, t) in store.audit() {
        assert!(concsynth::concolic::refutes(&p, t, e), "{e:?} does not refute {t:?}");
    }
}

#[test]
fn parallel_matches_sequential_height() {
    let p = parse(MAX2).unwrap();
    let opts = ConcolicOptions { jobs: 4, max_height: 4, ..Default::default() };
    let r = concolic_synth(&p, &opts).unwrap();
    assert_eq!(r.tree.height(), 2);
}

#[test]
fn unsatisfiable_spec_reports_no_solution() {
    let src = "(set-logic LIA)
(synth-fun f ((x Int)) Int)
(declare-var x Int)
(constraint (>= (f x) x))
(constraint (<= (f x) (- x 1)))";
    let p = parse(src).unwrap();
    let opts = ConcolicOptions { max_height: 3, ..Default::default() };
    assert_eq!(concolic_synth(&p, &opts).unwrap_err(), ConcolicError::NoSolutionUpTo(3));
}

#[test]
fn iteration_cap_escalates_instead_of_failing() {
    let p = parse(MAX2).unwrap();
    let opts = ConcolicOptions { height_iter_cap: Some(1), max_height: 3, ..Default::default() };
    match concolic_synth(&p, &opts) {
        Err(ConcolicError::HeightBudgetExhausted(hs)) => assert!(!hs.is_empty()),
        Ok(r) => assert!(r.tree.height() >= 2),
        Err(e) => panic!("unexpected {e}"),
    }
}

#[test]
fn nested_application_is_rejected() {
    let src = "(set-logic LIA)
(synth-fun f ((x Int)) Int)
(declare-var x Int)
(constraint (= (f (f x)) x))";
    let p = parse(src).unwrap();
    assert!(matches!(concolic_synth(&p, &ConcolicOptions::default()), Err(ConcolicError::Unsupported(_))));
}

#[test]
fn timeout_is_reported() {
    // max3 needs several rounds, far longer than the deadline.
    let src = "(set-logic LIA)
(synth-fun f ((x Int) (y Int) (z Int)) Int)
(declare-var x Int) (declare-var y Int) (declare-var z Int)
(constraint (>= (f x y z) x)) (constraint (>= (f x y z) y)) (constraint (>= (f x y z) z))
(constraint (or (= (f x y z) x) (= (f x y z) y) (= (f x y z) z)))";
    let p = parse(src).unwrap();
    let opts = ConcolicOptions { timeout: Some(Duration::from_millis(1)), ..Default::default() };
    assert_eq!(concolic_synth(&p, &opts).unwrap_err(), ConcolicError::Timeout);
}
