//! Boolean combinations over arbitrary atoms, and the integer atoms used by
//! the decision procedures (`e ≥ 0` and `e mod m = r`).
//!
//! `Formula<Atom>` is the extended CLIA condition. Conversions from the
//! surface `Cond` syntax go through [`atomize`], which lifts integer `ite`s
//! out of comparisons so that every atom is affine.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::linexpr::LinExpr;
use super::term::{Cond, Term};
use super::CliaError;

/// Default clause cap for DNF/CNF conversion.
pub const DEFAULT_CLAUSE_CAP: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula<A> {
    True,
    False,
    Atom(A),
    Not(Box<Formula<A>>),
    And(Vec<Formula<A>>),
    Or(Vec<Formula<A>>),
}

/// A possibly negated atom.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit<A> {
    pub positive: bool,
    pub atom: A,
}

impl<A> Lit<A> {
    pub fn pos(atom: A) -> Self {
        Lit { positive: true, atom }
    }

    pub fn neg(atom: A) -> Self {
        Lit { positive: false, atom }
    }

    pub fn into_formula(self) -> Formula<A> {
        if self.positive {
            Formula::Atom(self.atom)
        } else {
            Formula::Not(Box::new(Formula::Atom(self.atom)))
        }
    }
}

impl<A: Clone> Formula<A> {
    pub fn atom(a: A) -> Self {
        Formula::Atom(a)
    }

    /// Flattening conjunction with unit/zero folding.
    pub fn and(items: impl IntoIterator<Item = Formula<A>>) -> Self {
        let mut out = Vec::new();
        for f in items {
            match f {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    /// Flattening disjunction with unit/zero folding.
    pub fn or(items: impl IntoIterator<Item = Formula<A>>) -> Self {
        let mut out = Vec::new();
        for f in items {
            match f {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula<A>) -> Self {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(inner) => *inner,
            other => Formula::Not(Box::new(other)),
        }
    }

    pub fn and2(a: Formula<A>, b: Formula<A>) -> Self {
        Formula::and([a, b])
    }

    pub fn or2(a: Formula<A>, b: Formula<A>) -> Self {
        Formula::or([a, b])
    }

    pub fn implies(a: Formula<A>, b: Formula<A>) -> Self {
        Formula::or([Formula::not(a), b])
    }

    /// Replaces each atom by a formula.
    pub fn map_atoms<B: Clone>(&self, f: &mut dyn FnMut(&A) -> Formula<B>) -> Formula<B> {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(a) => f(a),
            Formula::Not(inner) => Formula::not(inner.map_atoms(f)),
            Formula::And(items) => Formula::and(items.iter().map(|i| i.map_atoms(f)).collect::<Vec<_>>()),
            Formula::Or(items) => Formula::or(items.iter().map(|i| i.map_atoms(f)).collect::<Vec<_>>()),
        }
    }

    pub fn try_map_atoms<B: Clone, E>(&self, f: &mut dyn FnMut(&A) -> Result<Formula<B>, E>) -> Result<Formula<B>, E> {
        Ok(match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(a) => f(a)?,
            Formula::Not(inner) => Formula::not(inner.try_map_atoms(f)?),
            Formula::And(items) => Formula::and(items.iter().map(|i| i.try_map_atoms(f)).collect::<Result<Vec<_>, E>>()?),
            Formula::Or(items) => Formula::or(items.iter().map(|i| i.try_map_atoms(f)).collect::<Result<Vec<_>, E>>()?),
        })
    }

    pub fn eval(&self, f: &mut dyn FnMut(&A) -> bool) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(a) => f(a),
            Formula::Not(inner) => !inner.eval(f),
            Formula::And(items) => items.iter().all(|i| i.eval(f)),
            Formula::Or(items) => items.iter().any(|i| i.eval(f)),
        }
    }

    pub fn visit_atoms<'a>(&'a self, f: &mut dyn FnMut(&'a A)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => f(a),
            Formula::Not(inner) => inner.visit_atoms(f),
            Formula::And(items) | Formula::Or(items) => items.iter().for_each(|i| i.visit_atoms(f)),
        }
    }

    pub fn atom_count(&self) -> usize {
        let mut n = 0;
        self.visit_atoms(&mut |_| n += 1);
        n
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 1,
            Formula::Not(inner) => 1 + inner.size(),
            Formula::And(items) | Formula::Or(items) => 1 + items.iter().map(Formula::size).sum::<usize>(),
        }
    }

    /// Negation normal form: `Not` only directly above atoms.
    pub fn nnf(&self) -> Formula<A> {
        self.nnf_pol(true)
    }

    fn nnf_pol(&self, positive: bool) -> Formula<A> {
        match (self, positive) {
            (Formula::True, true) | (Formula::False, false) => Formula::True,
            (Formula::True, false) | (Formula::False, true) => Formula::False,
            (Formula::Atom(a), true) => Formula::Atom(a.clone()),
            (Formula::Atom(a), false) => Formula::Not(Box::new(Formula::Atom(a.clone()))),
            (Formula::Not(inner), p) => inner.nnf_pol(!p),
            (Formula::And(items), true) | (Formula::Or(items), false) => {
                Formula::and(items.iter().map(|i| i.nnf_pol(positive)).collect::<Vec<_>>())
            }
            (Formula::And(items), false) | (Formula::Or(items), true) => {
                Formula::or(items.iter().map(|i| i.nnf_pol(positive)).collect::<Vec<_>>())
            }
        }
    }

    /// Disjunctive normal form as a list of literal conjunctions.
    pub fn dnf(&self, cap: usize) -> Result<Vec<Vec<Lit<A>>>, CliaError> {
        self.nnf().dnf_nnf(cap)
    }

    fn dnf_nnf(&self, cap: usize) -> Result<Vec<Vec<Lit<A>>>, CliaError> {
        Ok(match self {
            Formula::True => vec![vec![]],
            Formula::False => vec![],
            Formula::Atom(a) => vec![vec![Lit::pos(a.clone())]],
            Formula::Not(inner) => match &**inner {
                Formula::Atom(a) => vec![vec![Lit::neg(a.clone())]],
                other => Formula::not(other.clone()).nnf().dnf_nnf(cap)?,
            },
            Formula::Or(items) => {
                let mut out = Vec::new();
                for i in items {
                    out.extend(i.dnf_nnf(cap)?);
                    check_cap(out.len(), cap, "DNF")?;
                }
                out
            }
            Formula::And(items) => {
                let mut acc: Vec<Vec<Lit<A>>> = vec![vec![]];
                for i in items {
                    let part = i.dnf_nnf(cap)?;
                    check_cap(acc.len().saturating_mul(part.len()), cap, "DNF")?;
                    let mut next = Vec::with_capacity(acc.len() * part.len());
                    for a in &acc {
                        for p in &part {
                            let mut c = a.clone();
                            c.extend(p.iter().cloned());
                            next.push(c);
                        }
                    }
                    acc = next;
                }
                acc
            }
        })
    }

    /// Conjunctive normal form as a list of literal disjunctions.
    pub fn cnf(&self, cap: usize) -> Result<Vec<Vec<Lit<A>>>, CliaError> {
        // CNF(φ) is the dual of DNF(¬φ).
        let dual = Formula::not(self.clone()).dnf(cap)?;
        Ok(dual
            .into_iter()
            .map(|clause| clause.into_iter().map(|l| Lit { positive: !l.positive, atom: l.atom }).collect())
            .collect())
    }

    pub fn from_dnf(clauses: Vec<Vec<Lit<A>>>) -> Formula<A> {
        Formula::or(
            clauses
                .into_iter()
                .map(|c| Formula::and(c.into_iter().map(Lit::into_formula).collect::<Vec<_>>()))
                .collect::<Vec<_>>(),
        )
    }

    pub fn from_cnf(clauses: Vec<Vec<Lit<A>>>) -> Formula<A> {
        Formula::and(
            clauses
                .into_iter()
                .map(|c| Formula::or(c.into_iter().map(Lit::into_formula).collect::<Vec<_>>()))
                .collect::<Vec<_>>(),
        )
    }
}

fn check_cap(n: usize, cap: usize, what: &'static str) -> Result<(), CliaError> {
    if n > cap {
        Err(CliaError::SizeLimitExceeded { what, cap })
    } else {
        Ok(())
    }
}

/// Integer atom of an extended CLIA condition.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    /// `expr ≥ 0`
    Geq(LinExpr),
    /// `expr mod modulus = residue`, with `modulus ≥ 1` and `0 ≤ residue < modulus`.
    Mod { expr: LinExpr, modulus: BigInt, residue: BigInt },
}

/// Extended CLIA condition.
pub type ExtCond = Formula<Atom>;

impl Atom {
    pub fn geq(e: LinExpr) -> Atom {
        Atom::Geq(e)
    }

    pub fn modulo(expr: LinExpr, modulus: impl Into<BigInt>, residue: impl Into<BigInt>) -> Atom {
        let modulus = modulus.into();
        let residue = residue.into().mod_floor(&modulus);
        Atom::Mod { expr, modulus, residue }
    }

    pub fn eval(&self, vals: &[BigInt]) -> bool {
        match self {
            Atom::Geq(e) => !e.eval(vals).is_negative(),
            Atom::Mod { expr, modulus, residue } => expr.eval(vals).mod_floor(modulus) == *residue,
        }
    }

    pub fn expr(&self) -> &LinExpr {
        match self {
            Atom::Geq(e) => e,
            Atom::Mod { expr, .. } => expr,
        }
    }

    pub fn map_expr(&self, f: impl FnOnce(&LinExpr) -> LinExpr) -> Atom {
        match self {
            Atom::Geq(e) => Atom::Geq(f(e)),
            Atom::Mod { expr, modulus, residue } => {
                Atom::Mod { expr: f(expr), modulus: modulus.clone(), residue: residue.clone() }
            }
        }
    }

    /// Canonical form: gcd-reduced inequalities and reduced congruences.
    /// Constant atoms fold to `True`/`False`.
    pub fn normalize(&self) -> ExtCond {
        match self {
            Atom::Geq(e) => {
                if e.is_constant() {
                    return bool_formula(!e.offset().is_negative());
                }
                let g = e.coeff_gcd();
                if g.is_one() {
                    return Formula::Atom(self.clone());
                }
                // g·e' + d ≥ 0  ⇔  e' + ⌊d/g⌋ ≥ 0
                let coeffs: Vec<BigInt> = e.coeffs().iter().map(|c| c / &g).collect();
                Formula::Atom(Atom::Geq(LinExpr::new(coeffs, e.offset().div_floor(&g))))
            }
            Atom::Mod { expr, modulus, residue } => {
                if modulus.is_one() {
                    return Formula::True;
                }
                let coeffs: Vec<BigInt> = expr.coeffs().iter().map(|c| c.mod_floor(modulus)).collect();
                // Σ a·x ≡ r − d  (mod m)
                let target = (residue - expr.offset()).mod_floor(modulus);
                let g = coeffs.iter().fold(modulus.clone(), |g, c| g.gcd(c));
                if coeffs.iter().all(Zero::is_zero) {
                    return bool_formula(target.is_zero());
                }
                if !(&target % &g).is_zero() {
                    return Formula::False;
                }
                let m = modulus / &g;
                if m.is_one() {
                    return Formula::True;
                }
                let coeffs: Vec<BigInt> = coeffs.iter().map(|c| c / &g).collect();
                Formula::Atom(Atom::Mod { expr: LinExpr::new(coeffs, BigInt::zero()), modulus: m.clone(), residue: (&target / &g).mod_floor(&m) })
            }
        }
    }
}

fn bool_formula<A>(b: bool) -> Formula<A> {
    if b {
        Formula::True
    } else {
        Formula::False
    }
}

/// `¬(e ≥ 0)` over the integers.
pub fn negate_geq(e: &LinExpr) -> LinExpr {
    (-e).add_constant(&BigInt::from(-1))
}

impl ExtCond {
    pub fn geq(e: LinExpr) -> ExtCond {
        Formula::Atom(Atom::Geq(e))
    }

    pub fn eval_at(&self, vals: &[BigInt]) -> bool {
        self.eval(&mut |a| a.eval(vals))
    }

    pub fn has_mod(&self) -> bool {
        let mut found = false;
        self.visit_atoms(&mut |a| found |= matches!(a, Atom::Mod { .. }));
        found
    }

    /// Applies a simultaneous linear substitution to every atom.
    pub fn compose(&self, images: &[LinExpr]) -> ExtCond {
        self.map_atoms(&mut |a| Formula::Atom(a.map_expr(|e| e.compose(images))))
    }

    /// Replaces variable `i` by `image` everywhere.
    pub fn substitute(&self, i: usize, image: &LinExpr) -> ExtCond {
        self.map_atoms(&mut |a| Formula::Atom(a.map_expr(|e| e.substitute(i, image))))
    }

    pub fn mentions(&self, i: usize) -> bool {
        let mut found = false;
        self.visit_atoms(&mut |a| found |= a.expr().mentions(i));
        found
    }

    /// NNF in which negated inequalities are folded into inequalities;
    /// only congruences may remain under `Not`.
    pub fn nnf_int(&self) -> ExtCond {
        self.nnf().fold_negated_geq()
    }

    fn fold_negated_geq(&self) -> ExtCond {
        match self {
            Formula::Not(inner) => match &**inner {
                Formula::Atom(Atom::Geq(e)) => ExtCond::geq(negate_geq(e)),
                other => Formula::not(other.fold_negated_geq()),
            },
            Formula::And(items) => Formula::and(items.iter().map(|i| i.fold_negated_geq()).collect::<Vec<_>>()),
            Formula::Or(items) => Formula::or(items.iter().map(|i| i.fold_negated_geq()).collect::<Vec<_>>()),
            other => other.clone(),
        }
    }

    /// Normalizes atoms, folds constants, removes duplicate children.
    pub fn simplify(&self) -> ExtCond {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => a.normalize(),
            Formula::Not(inner) => Formula::not(inner.simplify()),
            Formula::And(items) => {
                let simplified = Formula::and(items.iter().map(|i| i.simplify()).collect::<Vec<_>>());
                dedupe(simplified, true)
            }
            Formula::Or(items) => {
                let simplified = Formula::or(items.iter().map(|i| i.simplify()).collect::<Vec<_>>());
                dedupe(simplified, false)
            }
        }
    }

    /// Converts to surface syntax; atoms become `e ≥ 0`.
    pub fn to_cond(&self) -> Result<Cond, CliaError> {
        self.to_cond_with(|e| Cond::geq(e.to_term(), Term::int(0)))
    }

    /// Like [`ExtCond::to_cond`] but renders atoms as `lhs ≥ rhs` with
    /// nonnegative coefficients on both sides.
    pub fn to_cond_pretty(&self) -> Result<Cond, CliaError> {
        self.to_cond_with(pretty_geq)
    }

    fn to_cond_with(&self, render: fn(&LinExpr) -> Cond) -> Result<Cond, CliaError> {
        Ok(match self {
            Formula::True => Cond::True,
            Formula::False => Cond::False,
            Formula::Atom(Atom::Geq(e)) => render(e),
            Formula::Atom(Atom::Mod { .. }) => return Err(CliaError::ModuloAtom),
            Formula::Not(inner) => Cond::not(inner.to_cond_with(render)?),
            Formula::And(items) => {
                Cond::and_all(items.iter().map(|i| i.to_cond_with(render)).collect::<Result<Vec<_>, _>>()?)
            }
            Formula::Or(items) => {
                Cond::or_any(items.iter().map(|i| i.to_cond_with(render)).collect::<Result<Vec<_>, _>>()?)
            }
        })
    }

    pub fn display_with<'a>(&'a self, names: &'a dyn Fn(usize) -> String) -> impl fmt::Display + 'a {
        struct D<'a>(&'a ExtCond, &'a dyn Fn(usize) -> String);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                match self.0 {
                    Formula::True => write!(f, "true"),
                    Formula::False => write!(f, "false"),
                    Formula::Atom(Atom::Geq(e)) => write!(f, "{} >= 0", e.display_with(self.1)),
                    Formula::Atom(Atom::Mod { expr, modulus, residue }) => {
                        write!(f, "({}) mod {} = {}", expr.display_with(self.1), modulus, residue)
                    }
                    Formula::Not(inner) => write!(f, "!({})", D(inner, self.1)),
                    Formula::And(items) | Formula::Or(items) => {
                        let sep = if matches!(self.0, Formula::And(_)) { " && " } else { " || " };
                        write!(f, "(")?;
                        for (i, item) in items.iter().enumerate() {
                            if i > 0 {
                                write!(f, "{sep}")?;
                            }
                            write!(f, "{}", D(item, self.1))?;
                        }
                        write!(f, ")")
                    }
                }
            }
        }
        D(self, names)
    }
}

impl fmt::Display for ExtCond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |i: usize| format!("x{i}");
        let shown = self.display_with(&names);
        write!(f, "{shown}")
    }
}

fn dedupe(f: ExtCond, conj: bool) -> ExtCond {
    let items = match f {
        Formula::And(items) if conj => items,
        Formula::Or(items) if !conj => items,
        other => return other,
    };
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(items.len());
    for i in items {
        // x ∧ ¬x and x ∨ ¬x
        let complement = Formula::not(i.clone());
        if seen.contains(&complement) {
            return bool_formula(!conj);
        }
        if seen.insert(i.clone()) {
            out.push(i);
        }
    }
    if conj {
        Formula::and(out)
    } else {
        Formula::or(out)
    }
}

/// `e ≥ 0` rendered as `lhs ≥ rhs` with nonnegative coefficients on both sides.
pub(crate) fn pretty_geq(e: &LinExpr) -> Cond {
    let mut pos = LinExpr::zero();
    let mut neg = LinExpr::zero();
    for i in e.vars() {
        let c = e.coeff(i);
        if c.is_positive() {
            pos.set_coeff(i, c);
        } else {
            neg.set_coeff(i, -c);
        }
    }
    let d = e.offset();
    if d.is_negative() {
        neg.set_offset(-d);
    } else {
        pos.set_offset(d.clone());
    }
    Cond::geq(pos.to_term(), neg.to_term())
}

/// Piecewise-affine view of a ground term: `(path condition, value)` pairs
/// whose conditions are mutually exclusive and exhaustive.
pub fn pieces(t: &Term, cap: usize) -> Result<Vec<(ExtCond, LinExpr)>, CliaError> {
    Ok(match t {
        Term::Const(c) => vec![(Formula::True, LinExpr::constant(c.clone()))],
        Term::Var(i) => vec![(Formula::True, LinExpr::var(*i))],
        Term::Add(a, b) => {
            let pa = pieces(a, cap)?;
            let pb = pieces(b, cap)?;
            check_cap(pa.len().saturating_mul(pb.len()), cap, "ite lifting")?;
            let mut out = Vec::with_capacity(pa.len() * pb.len());
            for (ca, ea) in &pa {
                for (cb, eb) in &pb {
                    let c = Formula::and2(ca.clone(), cb.clone());
                    if c != Formula::False {
                        out.push((c, ea + eb));
                    }
                }
            }
            out
        }
        Term::Mul(k, t) => pieces(t, cap)?.into_iter().map(|(c, e)| (c, e.scale(k))).collect(),
        Term::Ite(c, a, b) => {
            let guard = atomize_with_cap(c, cap)?;
            let mut out = Vec::new();
            for (pc, e) in pieces(a, cap)? {
                out.push((Formula::and2(guard.clone(), pc), e));
            }
            let neg = Formula::not(guard);
            for (pc, e) in pieces(b, cap)? {
                out.push((Formula::and2(neg.clone(), pc), e));
            }
            check_cap(out.len(), cap, "ite lifting")?;
            out
        }
        Term::App(f, _) => return Err(CliaError::UngroundedTerm(f.to_string())),
    })
}

/// Rewrites a ground condition into an extended CLIA condition whose atoms
/// are all `e ≥ 0`; comparisons between ite-terms are split by path.
pub fn atomize(c: &Cond) -> Result<ExtCond, CliaError> {
    atomize_with_cap(c, DEFAULT_CLAUSE_CAP)
}

pub fn atomize_with_cap(c: &Cond, cap: usize) -> Result<ExtCond, CliaError> {
    Ok(match c {
        Cond::Geq(a, b) => {
            let diff = Term::sub((**a).clone(), (**b).clone());
            if let Some(l) = diff.as_linear() {
                return Ok(ExtCond::geq(l));
            }
            Formula::or(
                pieces(&diff, cap)?
                    .into_iter()
                    .map(|(pc, e)| Formula::and2(pc, ExtCond::geq(e)))
                    .collect::<Vec<_>>(),
            )
        }
        Cond::And(a, b) => Formula::and2(atomize_with_cap(a, cap)?, atomize_with_cap(b, cap)?),
        Cond::Or(a, b) => Formula::or2(atomize_with_cap(a, cap)?, atomize_with_cap(b, cap)?),
        Cond::Not(a) => Formula::not(atomize_with_cap(a, cap)?),
        Cond::Ite(g, a, b) => {
            let g = atomize_with_cap(g, cap)?;
            Formula::or2(
                Formula::and2(g.clone(), atomize_with_cap(a, cap)?),
                Formula::and2(Formula::not(g), atomize_with_cap(b, cap)?),
            )
        }
        Cond::AppB(f, _) => return Err(CliaError::UngroundedTerm(f.to_string())),
        Cond::True => Formula::True,
        Cond::False => Formula::False,
    })
}

/// Negation normal form of a ground condition, over `e ≥ 0` atoms.
pub fn to_nnf(c: &Cond) -> Result<Cond, CliaError> {
    atomize(c)?.nnf().to_cond()
}

pub fn to_dnf(c: &Cond, cap: usize) -> Result<Cond, CliaError> {
    Formula::from_dnf(atomize(c)?.dnf(cap)?).to_cond()
}

pub fn to_cnf(c: &Cond, cap: usize) -> Result<Cond, CliaError> {
    Formula::from_cnf(atomize(c)?.cnf(cap)?).to_cond()
}
