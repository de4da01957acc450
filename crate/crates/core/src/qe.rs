//! Cooper-style elimination of one existentially quantified integer variable
//! from an extended CLIA condition.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::clia::{Atom, CliaError, Cond, ExtCond, Formula, LinExpr};

/// Node budget for a single elimination result.
pub const DEFAULT_QE_CAP: usize = 1 << 22;

/// `γ ⇔ ∃v. body` (with `v ≥ 0` conjoined when `lower_bound_zero`).
pub fn eliminate(var: usize, body: &ExtCond, lower_bound_zero: bool) -> Result<ExtCond, CliaError> {
    eliminate_with_cap(var, body, lower_bound_zero, DEFAULT_QE_CAP)
}

pub fn eliminate_with_cap(var: usize, body: &ExtCond, lower_bound_zero: bool, cap: usize) -> Result<ExtCond, CliaError> {
    let f = body.nnf_int().simplify();
    let nonneg = ExtCond::geq(LinExpr::var(var));
    let parts: Vec<ExtCond> = match f {
        Formula::Or(items) => items,
        other => vec![other],
    };
    let mut out = Vec::with_capacity(parts.len());
    for p in parts {
        let p = if lower_bound_zero { Formula::and2(p, nonneg.clone()).simplify() } else { p };
        let g = cooper(var, p, cap)?;
        if g == Formula::True {
            return Ok(Formula::True);
        }
        out.push(g);
    }
    Ok(Formula::or(out).simplify())
}

/// Least common multiple of the absolute values in `xs` (1 when empty).
fn lcm_all<'a>(xs: impl IntoIterator<Item = &'a BigInt>) -> BigInt {
    xs.into_iter().fold(BigInt::one(), |l, x| if x.is_zero() { l } else { l.lcm(&x.abs()) })
}

/// Rescales every atom so the coefficient of `var` is ±1, where `var` now
/// stands for `L·var`.
fn unit_scale(var: usize, f: &ExtCond, l: &BigInt) -> ExtCond {
    f.map_atoms(&mut |a| {
        let coef = a.expr().coeff(var);
        if coef.is_zero() {
            return Formula::Atom(a.clone());
        }
        let k = l / coef.abs();
        let sign = if coef.is_negative() { -BigInt::one() } else { BigInt::one() };
        let mut e = a.expr().scale(&k);
        e.set_coeff(var, sign);
        Formula::Atom(match a {
            Atom::Geq(_) => Atom::Geq(e),
            Atom::Mod { modulus, residue, .. } => Atom::modulo(e, modulus * &k, residue * &k),
        })
    })
}

/// Rest of an atom's expression once the `var` term is removed.
fn without(var: usize, e: &LinExpr) -> LinExpr {
    let mut r = e.clone();
    r.set_coeff(var, BigInt::zero());
    r
}

fn cooper(var: usize, f: ExtCond, cap: usize) -> Result<ExtCond, CliaError> {
    if !f.mentions(var) {
        return Ok(f);
    }
    let mut coeffs = Vec::new();
    f.visit_atoms(&mut |a| coeffs.push(a.expr().coeff(var)));
    let l = lcm_all(&coeffs);
    let mut g = unit_scale(var, &f, &l);
    if !l.is_one() {
        g = Formula::and2(g, Formula::Atom(Atom::modulo(LinExpr::var(var), l.clone(), 0)));
    }

    let mut lowers: Vec<LinExpr> = Vec::new();
    let mut uppers: Vec<LinExpr> = Vec::new();
    let mut moduli: Vec<BigInt> = Vec::new();
    g.visit_atoms(&mut |a| {
        let c = a.expr().coeff(var);
        if c.is_zero() {
            return;
        }
        let t = without(var, a.expr());
        match a {
            // v + t ≥ 0, i.e. v > −t − 1
            Atom::Geq(_) if c.is_positive() => lowers.push((-&t).add_constant(&-BigInt::one())),
            // −v + t ≥ 0, i.e. v < t + 1
            Atom::Geq(_) => uppers.push(t.add_constant(&BigInt::one())),
            Atom::Mod { modulus, .. } => moduli.push(modulus.clone()),
        }
    });
    lowers.sort();
    lowers.dedup();
    uppers.sort();
    uppers.dedup();

    if let Some(pivot) = equality_pivot(var, &g) {
        return Ok(g.substitute(var, &pivot).simplify());
    }

    let delta = lcm_all(&moduli);
    let use_lower = lowers.len() <= uppers.len();
    let (bounds, infinite_value) = if use_lower { (&lowers, false) } else { (&uppers, true) };
    let delta_n: usize = delta.try_into().map_err(|_| CliaError::SizeLimitExceeded { what: "elimination modulus", cap })?;
    let disjuncts = (bounds.len() + 1).saturating_mul(delta_n);
    if disjuncts.saturating_mul(g.size()) > cap {
        return Err(CliaError::SizeLimitExceeded { what: "quantifier elimination", cap });
    }

    // Behaviour of the formula for v → −∞ (or +∞): bounds on v collapse.
    let at_infinity = g.map_atoms(&mut |a| match a {
        Atom::Geq(e) if !e.coeff(var).is_zero() => {
            if e.coeff(var).is_positive() == infinite_value {
                Formula::True
            } else {
                Formula::False
            }
        }
        other => Formula::Atom(other.clone()),
    });

    let mut out = Vec::new();
    for j in 1..=delta_n {
        let j = BigInt::from(j);
        let shift = if use_lower { j.clone() } else { -&j };
        let piece = at_infinity.substitute(var, &LinExpr::constant(shift.clone())).simplify();
        if piece == Formula::True {
            return Ok(Formula::True);
        }
        out.push(piece);
        for b in bounds {
            let piece = g.substitute(var, &b.add_constant(&shift)).simplify();
            if piece == Formula::True {
                return Ok(Formula::True);
            }
            out.push(piece);
        }
    }
    Ok(Formula::or(out).simplify())
}

/// For a conjunction containing both `v + t ≥ 0` and `−v − t ≥ 0`, the
/// forced value `−t` of `v`.
fn equality_pivot(var: usize, g: &ExtCond) -> Option<LinExpr> {
    let conj: Vec<&ExtCond> = match g {
        Formula::And(items) => items.iter().flat_map(|i| match i {
            Formula::And(inner) => inner.iter().collect::<Vec<_>>(),
            other => vec![other],
        }).collect(),
        other => vec![other],
    };
    let geqs: Vec<&LinExpr> = conj
        .iter()
        .filter_map(|c| match c {
            Formula::Atom(Atom::Geq(e)) if !e.coeff(var).is_zero() => Some(e),
            _ => None,
        })
        .collect();
    for e in &geqs {
        if e.coeff(var).is_one() {
            let neg = -*e;
            if geqs.iter().any(|o| **o == neg) {
                return Some(-&without(var, e));
            }
        }
    }
    None
}

/// Weakens every congruence (of either polarity) to `true`; the result is
/// implied by `c`.
pub fn strip_modulo(c: &ExtCond) -> Cond {
    fn go(f: &ExtCond) -> ExtCond {
        match f {
            Formula::Atom(Atom::Mod { .. }) => Formula::True,
            Formula::Not(inner) if matches!(**inner, Formula::Atom(Atom::Mod { .. })) => Formula::True,
            Formula::And(items) => Formula::and(items.iter().map(go).collect::<Vec<_>>()),
            Formula::Or(items) => Formula::or(items.iter().map(go).collect::<Vec<_>>()),
            other => other.clone(),
        }
    }
    go(&c.nnf_int()).simplify().to_cond_pretty().expect("congruences were removed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clia::valuation;

    fn exists_in(range: std::ops::RangeInclusive<i64>, var: usize, f: &ExtCond, point: &[i64]) -> bool {
        range.into_iter().any(|k| {
            let mut v = point.to_vec();
            v[var] = k;
            f.eval_at(&valuation(&v))
        })
    }

    #[test]
    fn even_nonnegative() {
        // ∃k ≥ 0. x − 2k = 0
        let body = Formula::and2(ExtCond::geq(LinExpr::from_i64s(&[1, -2], 0)), ExtCond::geq(LinExpr::from_i64s(&[-1, 2], 0)));
        let g = eliminate(1, &body, true).unwrap();
        assert!(!g.mentions(1));
        for x in -10..=10 {
            let want = exists_in(0..=10, 1, &body, &[x, 0]);
            assert_eq!(g.eval_at(&valuation(&[x, 0])), want, "x = {x}, γ = {g}");
            assert_eq!(want, x >= 0 && x % 2 == 0);
        }
    }

    #[test]
    fn monotone_bound() {
        // ∃k ≥ 0. x − k ≥ 0  ⇔  x ≥ 0
        let g = eliminate(1, &ExtCond::geq(LinExpr::from_i64s(&[1, -1], 0)), true).unwrap();
        assert_eq!(g, ExtCond::geq(LinExpr::var(0)));
    }

    #[test]
    fn empty_interval() {
        // ∃k ≥ 0. k ≥ x ∧ k ≤ x − 1
        let body = Formula::and2(ExtCond::geq(LinExpr::from_i64s(&[-1, 1], 0)), ExtCond::geq(LinExpr::from_i64s(&[1, -1], -1)));
        assert_eq!(eliminate(1, &body, true).unwrap(), Formula::False);
    }

    #[test]
    fn congruences_with_scaled_variable() {
        // ∃k. 3k = x + 1 ∧ k mod 2 = 1 ∧ ¬(x mod 5 = 0)
        let body = Formula::and(vec![
            ExtCond::geq(LinExpr::from_i64s(&[-1, 3], -1)),
            ExtCond::geq(LinExpr::from_i64s(&[1, -3], 1)),
            Formula::Atom(Atom::modulo(LinExpr::var(1), 2, 1)),
            Formula::not(Formula::Atom(Atom::modulo(LinExpr::var(0), 5, 0))),
        ]);
        let g = eliminate(1, &body, false).unwrap();
        for x in -30..=30 {
            assert_eq!(g.eval_at(&valuation(&[x, 0])), exists_in(-20..=20, 1, &body, &[x, 0]), "x = {x}");
        }
    }

    #[test]
    fn strip_modulo_weakens() {
        let even = Formula::Atom(Atom::modulo(LinExpr::var(0), 2, 0));
        let c = Formula::and2(ExtCond::geq(LinExpr::var(0)), even);
        assert_eq!(strip_modulo(&c), Cond::geq(crate::Term::var(0), crate::Term::int(0)));
        let plain = ExtCond::geq(LinExpr::from_i64s(&[1], -3));
        assert!(strip_modulo(&plain).eval(&valuation(&[3])).unwrap());
        let neg = Formula::or2(Formula::not(Formula::Atom(Atom::modulo(LinExpr::var(0), 3, 1))), ExtCond::geq(LinExpr::var(0)));
        let s = strip_modulo(&neg);
        assert_eq!(s, Cond::True);
        for x in -9..=9 {
            let v = valuation(&[x]);
            assert!(!neg.eval_at(&v) || s.eval(&v).unwrap());
        }
    }
}
