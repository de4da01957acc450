use std::collections::HashSet;
use std::path::PathBuf;

use num_bigint::BigInt;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use concsynth::at::{at_solve, detect_translational, fast_trans, AtError, Branch, InvProblem};
use concsynth::clia::{valuation, Body, ExtCond, Formula, LinExpr, Valuation};
use concsynth::smt::{SmtConfig, SmtSession, Validity};
use concsynth::sygus::{parse, SynthProblem};
use concsynth::verify::check_solution;

fn corpus(rel: &str) -> SynthProblem {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(rel);
    parse(&std::fs::read_to_string(&path).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn session() -> SmtSession {
    SmtSession::new(SmtConfig::for_program("z3")).expect("z3 on PATH")
}

/// All points of the box `[-r, r]^d`.
fn grid(d: usize, r: i64) -> Vec<Valuation> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out.into_iter().flat_map(|p: Vec<i64>| (-r..=r).map(move |v| [p.clone(), vec![v]].concat())).collect();
    }
    out.into_iter().map(|p| valuation(&p)).collect()
}

/// States visited within `steps` iterations from every pre state in the box.
fn simulate(p: &SynthProblem, ip: &InvProblem, r: i64, steps: usize) -> HashSet<Valuation> {
    let pre = &p.inv_parts.as_ref().unwrap().pre;
    let mut seen = HashSet::new();
    for start in grid(ip.nvars, r) {
        if !pre.eval(&start).unwrap() {
            continue;
        }
        let mut x = start;
        for _ in 0..=steps {
            if !seen.insert(x.clone()) {
                break;
            }
            match ip.step(&x) {
                Some(next) => x = next,
                None => break,
            }
        }
    }
    seen
}

enum Expect {
    Solved,
    NoInvariant,
}

#[test]
fn corpus_outcomes() {
    use Expect::*;
    let cases = [
        ("counter.sl", Solved),
        ("counter_stride2.sl", Solved),
        ("two_phase.sl", Solved),
        ("symbolic_bound.sl", Solved),
        ("stutter.sl", Solved),
        ("post_false.sl", NoInvariant),
        ("overflow_counter.sl", NoInvariant),
        ("diagonal.sl", Solved),
        ("countdown.sl", Solved),
        ("sequential.sl", Solved),
        ("partial_exit.sl", Solved),
    ];
    for (file, expect) in cases {
        let p = corpus(&format!("at/{file}"));
        let ip = detect_translational(&p).unwrap();
        let mut s = session();
        let reach = simulate(&p, &ip, 12, 60);
        match (at_solve(&p, &ip, &mut s), expect) {
            (Ok(sol), Solved) => {
                assert_eq!(check_solution(&p, &Body::Bool(sol.inv.clone()), &mut session()).unwrap(), Validity::Valid, "{file}");
                for x in &reach {
                    assert!(sol.strong.eval_at(x), "{file}: reachable {x:?} outside the strongest invariant");
                }
            }
            (Err(AtError::NoCliaInvariant(w)), NoInvariant) => {
                assert!(reach.contains(&w), "{file}: witness {w:?} is not reachable");
            }
            (other, _) => panic!("{file}: unexpected {other:?}"),
        }
    }
}

#[test]
fn strongest_invariant_is_exact_for_the_counter() {
    let p = corpus("at/counter.sl");
    let ip = detect_translational(&p).unwrap();
    let sol = at_solve(&p, &ip, &mut session()).unwrap();
    for x in -5..=15 {
        assert_eq!(sol.strong.eval_at(&valuation(&[x])), (0..=10).contains(&x), "x = {x}");
    }
    assert_eq!(sol.graph.edges, vec![(0, 1)]);
    assert_eq!(sol.graph.diameter, Some(1));
}

#[test]
fn parity_requires_fallback() {
    let p = corpus("at_fallback/skip_five.sl");
    let ip = detect_translational(&p).unwrap();
    let err = at_solve(&p, &ip, &mut session()).unwrap_err();
    assert_eq!(err, AtError::ModuloNeeded);
}

#[test]
fn ping_pong_is_cyclic() {
    let src = "(set-logic LIA)(synth-inv inv_fun ((x Int)))(declare-primed-var x Int)
(define-fun pre_fun ((x Int)) Bool (= x 0))
(define-fun trans_fun ((x Int) (x! Int)) Bool
  (or (and (<= x 5) (= x! (+ x 1))) (and (>= x 6) (<= x 10) (= x! (- x 1)))))
(define-fun post_fun ((x Int)) Bool (<= x 6))
(inv-constraint inv_fun pre_fun trans_fun post_fun)";
    let p = parse(src).unwrap();
    let ip = detect_translational(&p).unwrap();
    assert_eq!(at_solve(&p, &ip, &mut session()).unwrap_err(), AtError::Cyclic);
}

#[test]
fn nondeterministic_choice_is_rejected() {
    let src = "(set-logic LIA)(synth-inv inv_fun ((x Int)))(declare-primed-var x Int)
(define-fun pre_fun ((x Int)) Bool (= x 0))
(define-fun trans_fun ((x Int) (x! Int)) Bool
  (or (and (<= x 5) (= x! (+ x 1))) (and (<= x 5) (= x! (+ x 2)))))
(define-fun post_fun ((x Int)) Bool (<= x 7))
(inv-constraint inv_fun pre_fun trans_fun post_fun)";
    let p = parse(src).unwrap();
    let ip = detect_translational(&p).unwrap();
    assert_eq!(at_solve(&p, &ip, &mut session()).unwrap_err(), AtError::Nondeterministic);
}

/// Random single-branch system checked point-wise against simulation.
pub fn random_branch(rng: &mut StdRng, d: usize) -> Branch {
    let n_atoms = rng.gen_range(0..=3);
    let guard = (0..n_atoms)
        .map(|_| {
            let coeffs: Vec<i64> = (0..d).map(|_| rng.gen_range(-3..=3)).collect();
            LinExpr::from_i64s(&coeffs, rng.gen_range(-10..=10))
        })
        .collect();
    let shift = (0..d).map(|_| LinExpr::constant(rng.gen_range(-3..=3))).collect();
    Branch { guard, shift }
}

fn box_formula(d: usize, r: i64) -> ExtCond {
    Formula::and((0..d).flat_map(|j| {
        let mut lo = vec![0; d];
        lo[j] = 1;
        let mut hi = vec![0; d];
        hi[j] = -1;
        [ExtCond::geq(LinExpr::from_i64s(&lo, r)), ExtCond::geq(LinExpr::from_i64s(&hi, r))]
    }).collect::<Vec<_>>())
}

#[test]
fn fast_trans_matches_simulation() {
    let mut rng = StdRng::seed_from_u64(11);
    for case in 0..30 {
        let d = rng.gen_range(1..=2);
        let b = random_branch(&mut rng, d);
        let pre = box_formula(d, 2);
        let f = fast_trans(&pre, std::slice::from_ref(&b), d).unwrap();
        let mut expected = HashSet::new();
        for start in grid(d, 2) {
            if !b.holds_at(&start) {
                expected.insert(start);
                continue;
            }
            let mut x = start;
            for _ in 0..=50 {
                if !b.holds_at(&x) {
                    break;
                }
                expected.insert(x.clone());
                x = x.iter().zip(&b.shift).map(|(v, c)| v + c.offset()).collect::<Vec<BigInt>>();
            }
        }
        for x in grid(d, 20 / d as i64) {
            assert_eq!(f.eval_at(&x), expected.contains(&x), "case {case}: {b:?} at {x:?}");
        }
    }
}
