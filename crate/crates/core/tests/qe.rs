use num_bigint::BigInt;
use num_integer::Integer;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use concsynth::clia::{valuation, Atom, ExtCond, Formula, LinExpr};
use concsynth::qe::eliminate;

/// Random formula over x0, x1 and the quantified x2.
fn random_formula(rng: &mut StdRng) -> ExtCond {
    let n_atoms = rng.gen_range(1..=4);
    let mut atoms = Vec::new();
    for _ in 0..n_atoms {
        let coeffs: Vec<i64> = (0..3).map(|_| rng.gen_range(-4..=4)).collect();
        let offset = rng.gen_range(-6..=6);
        let e = LinExpr::from_i64s(&coeffs, offset);
        let atom = if rng.gen_bool(0.25) {
            let m = rng.gen_range(2..=4);
            Formula::Atom(Atom::modulo(e, m, rng.gen_range(0..m)))
        } else {
            ExtCond::geq(e)
        };
        atoms.push(if rng.gen_bool(0.3) { Formula::not(atom) } else { atom });
    }
    let mut f = atoms.pop().unwrap();
    while let Some(a) = atoms.pop() {
        f = if rng.gen_bool(0.5) { Formula::and2(f, a) } else { Formula::or2(f, a) };
    }
    f
}

/// Witness radius: any satisfiable instance has a witness with
/// |x2| ≤ max|rest of atom| + lcm(coefficients)·lcm(moduli) + 2.
fn witness_radius(f: &ExtCond, point: &[i64]) -> i64 {
    let vals = valuation(point);
    let mut t_max = BigInt::from(0);
    let mut l = BigInt::from(1);
    let mut m = BigInt::from(1);
    f.visit_atoms(&mut |a| {
        let mut rest = a.expr().clone();
        let c = rest.coeff(2);
        rest.set_coeff(2, BigInt::from(0));
        t_max = t_max.clone().max(rest.eval(&vals).magnitude().clone().into());
        if c != BigInt::from(0) {
            l = l.lcm(&c);
        }
        if let Atom::Mod { modulus, .. } = a {
            m = m.lcm(modulus);
        }
    });
    i64::try_from(t_max + l * m + 2).unwrap()
}

#[test]
fn random_eliminations_match_brute_force() {
    let mut rng = StdRng::seed_from_u64(7);
    for case in 0..150 {
        let f = random_formula(&mut rng);
        let nonneg = rng.gen_bool(0.5);
        let g = eliminate(2, &f, nonneg).unwrap();
        assert!(!g.mentions(2));
        for x0 in -6..=6 {
            for x1 in -6..=6 {
                let r = witness_radius(&f, &[x0, x1, 0]);
                let lo = if nonneg { 0 } else { -r };
                let want = (lo..=r).any(|k| f.eval_at(&valuation(&[x0, x1, k])));
                assert_eq!(g.eval_at(&valuation(&[x0, x1, 0])), want, "case {case}: {f} at ({x0},{x1}) gave {g}");
            }
        }
    }
}
