use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use super::linexpr::LinExpr;
use super::CliaError;

/// Name of a function symbol (the unknown being synthesized, or a helper).
pub type Symbol = Arc<str>;

/// Integer-valued CLIA term.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Const(BigInt),
    Var(usize),
    Add(Box<Term>, Box<Term>),
    /// Scalar multiplication; the scalar is always a literal.
    Mul(BigInt, Box<Term>),
    Ite(Box<Cond>, Box<Term>, Box<Term>),
    App(Symbol, Vec<Term>),
}

/// Boolean-valued CLIA condition.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Cond {
    Geq(Box<Term>, Box<Term>),
    And(Box<Cond>, Box<Cond>),
    Or(Box<Cond>, Box<Cond>),
    Not(Box<Cond>),
    Ite(Box<Cond>, Box<Cond>, Box<Cond>),
    AppB(Symbol, Vec<Term>),
    True,
    False,
}

/// Runtime value of an application, used when evaluating non-ground terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Int(BigInt),
    Bool(bool),
}

/// Interprets function applications during evaluation.
pub trait FunInterp {
    fn apply(&self, f: &Symbol, args: &[BigInt]) -> Option<Value>;
}

/// Interpretation with no functions: every application is an error.
pub struct NoFuns;

impl FunInterp for NoFuns {
    fn apply(&self, _f: &Symbol, _args: &[BigInt]) -> Option<Value> {
        None
    }
}

impl<F> FunInterp for F
where
    F: Fn(&Symbol, &[BigInt]) -> Option<Value>,
{
    fn apply(&self, f: &Symbol, args: &[BigInt]) -> Option<Value> {
        self(f, args)
    }
}

impl Term {
    pub fn int(v: i64) -> Term {
        Term::Const(BigInt::from(v))
    }

    pub fn var(i: usize) -> Term {
        Term::Var(i)
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::Add(Box::new(a), Box::new(Term::Mul(BigInt::from(-1), Box::new(b))))
    }

    pub fn mul(k: impl Into<BigInt>, t: Term) -> Term {
        Term::Mul(k.into(), Box::new(t))
    }

    pub fn ite(c: Cond, a: Term, b: Term) -> Term {
        Term::Ite(Box::new(c), Box::new(a), Box::new(b))
    }

    pub fn app(f: &Symbol, args: Vec<Term>) -> Term {
        Term::App(f.clone(), args)
    }

    pub fn eval(&self, vals: &[BigInt]) -> Result<BigInt, CliaError> {
        self.eval_with(vals, &NoFuns)
    }

    pub fn eval_with(&self, vals: &[BigInt], interp: &dyn FunInterp) -> Result<BigInt, CliaError> {
        Ok(match self {
            Term::Const(c) => c.clone(),
            Term::Var(i) => vals.get(*i).cloned().ok_or(CliaError::VarOutOfRange(*i))?,
            Term::Add(a, b) => a.eval_with(vals, interp)? + b.eval_with(vals, interp)?,
            Term::Mul(k, t) => k * t.eval_with(vals, interp)?,
            Term::Ite(c, a, b) => {
                if c.eval_with(vals, interp)? {
                    a.eval_with(vals, interp)?
                } else {
                    b.eval_with(vals, interp)?
                }
            }
            Term::App(f, args) => {
                let args = args.iter().map(|a| a.eval_with(vals, interp)).collect::<Result<Vec<_>, _>>()?;
                match interp.apply(f, &args) {
                    Some(Value::Int(v)) => v,
                    Some(Value::Bool(_)) => return Err(CliaError::SortMismatch(f.to_string())),
                    None => return Err(CliaError::UngroundedTerm(f.to_string())),
                }
            }
        })
    }

    /// True iff the term contains no function application.
    pub fn is_ground(&self) -> bool {
        match self {
            Term::Const(_) | Term::Var(_) => true,
            Term::Add(a, b) => a.is_ground() && b.is_ground(),
            Term::Mul(_, t) => t.is_ground(),
            Term::Ite(c, a, b) => c.is_ground() && a.is_ground() && b.is_ground(),
            Term::App(..) => false,
        }
    }

    /// The affine form of an ite-free, application-free term.
    pub fn as_linear(&self) -> Option<LinExpr> {
        match self {
            Term::Const(c) => Some(LinExpr::constant(c.clone())),
            Term::Var(i) => Some(LinExpr::var(*i)),
            Term::Add(a, b) => Some(&a.as_linear()? + &b.as_linear()?),
            Term::Mul(k, t) => Some(t.as_linear()?.scale(k)),
            Term::Ite(..) | Term::App(..) => None,
        }
    }

    /// Value of a closed constant term.
    pub fn as_constant(&self) -> Option<BigInt> {
        let l = self.as_linear()?;
        l.is_constant().then(|| l.offset().clone())
    }

    /// Replaces each `Var(i)` with `images[i]`; indices past the slice are kept.
    pub fn subst_vars(&self, images: &[Term]) -> Term {
        match self {
            Term::Const(_) => self.clone(),
            Term::Var(i) => images.get(*i).cloned().unwrap_or_else(|| self.clone()),
            Term::Add(a, b) => Term::add(a.subst_vars(images), b.subst_vars(images)),
            Term::Mul(k, t) => Term::Mul(k.clone(), Box::new(t.subst_vars(images))),
            Term::Ite(c, a, b) => Term::ite(c.subst_vars(images), a.subst_vars(images), b.subst_vars(images)),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.subst_vars(images)).collect()),
        }
    }

    /// Rewrites applications bottom-up. Arguments are rewritten before the
    /// callbacks see them; a `None` from a callback keeps the application.
    pub fn map_apps(&self, on_int: &mut dyn FnMut(&Symbol, &[Term]) -> Option<Term>, on_bool: &mut dyn FnMut(&Symbol, &[Term]) -> Option<Cond>) -> Term {
        match self {
            Term::Const(_) | Term::Var(_) => self.clone(),
            Term::Add(a, b) => Term::add(a.map_apps(on_int, on_bool), b.map_apps(on_int, on_bool)),
            Term::Mul(k, t) => Term::Mul(k.clone(), Box::new(t.map_apps(on_int, on_bool))),
            Term::Ite(c, a, b) => Term::ite(
                c.map_apps(on_int, on_bool),
                a.map_apps(on_int, on_bool),
                b.map_apps(on_int, on_bool),
            ),
            Term::App(f, args) => {
                let args: Vec<Term> = args.iter().map(|a| a.map_apps(on_int, on_bool)).collect();
                on_int(f, &args).unwrap_or(Term::App(f.clone(), args))
            }
        }
    }

    /// Visits every application (int and bool) in pre-order.
    pub fn visit_apps<'a>(&'a self, visit: &mut dyn FnMut(&'a Symbol, &'a [Term])) {
        match self {
            Term::Const(_) | Term::Var(_) => {}
            Term::Add(a, b) => {
                a.visit_apps(visit);
                b.visit_apps(visit);
            }
            Term::Mul(_, t) => t.visit_apps(visit),
            Term::Ite(c, a, b) => {
                c.visit_apps(visit);
                a.visit_apps(visit);
                b.visit_apps(visit);
            }
            Term::App(f, args) => {
                visit(f, args);
                for a in args {
                    a.visit_apps(visit);
                }
            }
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<usize>) {
        match self {
            Term::Const(_) => {}
            Term::Var(i) => {
                if !out.contains(i) {
                    out.push(*i);
                }
            }
            Term::Add(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Term::Mul(_, t) => t.collect_vars(out),
            Term::Ite(c, a, b) => {
                c.collect_vars(out);
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Folds linear subterms and constant-guard ites.
    pub fn simplify(&self) -> Term {
        if let Some(l) = self.as_linear() {
            return l.to_term();
        }
        match self {
            Term::Add(a, b) => Term::add(a.simplify(), b.simplify()),
            Term::Mul(k, t) if k.is_one() => t.simplify(),
            Term::Mul(k, t) => Term::Mul(k.clone(), Box::new(t.simplify())),
            Term::Ite(c, a, b) => {
                let c = c.simplify();
                match c {
                    Cond::True => a.simplify(),
                    Cond::False => b.simplify(),
                    c => {
                        let (a, b) = (a.simplify(), b.simplify());
                        if a == b {
                            a
                        } else {
                            Term::ite(c, a, b)
                        }
                    }
                }
            }
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(Term::simplify).collect()),
            Term::Const(_) | Term::Var(_) => self.clone(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Const(_) | Term::Var(_) => 1,
            Term::Add(a, b) => 1 + a.size() + b.size(),
            Term::Mul(_, t) => 1 + t.size(),
            Term::Ite(c, a, b) => 1 + c.size() + a.size() + b.size(),
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }
}

impl Cond {
    pub fn geq(a: Term, b: Term) -> Cond {
        Cond::Geq(Box::new(a), Box::new(b))
    }

    pub fn leq(a: Term, b: Term) -> Cond {
        Cond::geq(b, a)
    }

    /// `a > b`, encoded over the integers as `a ≥ b + 1`.
    pub fn gt(a: Term, b: Term) -> Cond {
        Cond::geq(a, Term::add(b, Term::int(1)))
    }

    pub fn lt(a: Term, b: Term) -> Cond {
        Cond::gt(b, a)
    }

    /// `a = b`, desugared to `a ≥ b ∧ b ≥ a`.
    pub fn eq(a: Term, b: Term) -> Cond {
        Cond::and(Cond::geq(a.clone(), b.clone()), Cond::geq(b, a))
    }

    pub fn and(a: Cond, b: Cond) -> Cond {
        Cond::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Cond, b: Cond) -> Cond {
        Cond::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Cond) -> Cond {
        Cond::Not(Box::new(a))
    }

    pub fn implies(a: Cond, b: Cond) -> Cond {
        Cond::or(Cond::not(a), b)
    }

    pub fn ite(c: Cond, a: Cond, b: Cond) -> Cond {
        Cond::Ite(Box::new(c), Box::new(a), Box::new(b))
    }

    /// Left-folded conjunction; `True` when empty.
    pub fn and_all(items: impl IntoIterator<Item = Cond>) -> Cond {
        items.into_iter().reduce(Cond::and).unwrap_or(Cond::True)
    }

    /// Left-folded disjunction; `False` when empty.
    pub fn or_any(items: impl IntoIterator<Item = Cond>) -> Cond {
        items.into_iter().reduce(Cond::or).unwrap_or(Cond::False)
    }

    pub fn eval(&self, vals: &[BigInt]) -> Result<bool, CliaError> {
        self.eval_with(vals, &NoFuns)
    }

    pub fn eval_with(&self, vals: &[BigInt], interp: &dyn FunInterp) -> Result<bool, CliaError> {
        Ok(match self {
            Cond::Geq(a, b) => a.eval_with(vals, interp)? >= b.eval_with(vals, interp)?,
            Cond::And(a, b) => a.eval_with(vals, interp)? && b.eval_with(vals, interp)?,
            Cond::Or(a, b) => a.eval_with(vals, interp)? || b.eval_with(vals, interp)?,
            Cond::Not(a) => !a.eval_with(vals, interp)?,
            Cond::Ite(c, a, b) => {
                if c.eval_with(vals, interp)? {
                    a.eval_with(vals, interp)?
                } else {
                    b.eval_with(vals, interp)?
                }
            }
            Cond::AppB(f, args) => {
                let args = args.iter().map(|a| a.eval_with(vals, interp)).collect::<Result<Vec<_>, _>>()?;
                match interp.apply(f, &args) {
                    Some(Value::Bool(v)) => v,
                    Some(Value::Int(_)) => return Err(CliaError::SortMismatch(f.to_string())),
                    None => return Err(CliaError::UngroundedTerm(f.to_string())),
                }
            }
            Cond::True => true,
            Cond::False => false,
        })
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Cond::Geq(a, b) => a.is_ground() && b.is_ground(),
            Cond::And(a, b) | Cond::Or(a, b) => a.is_ground() && b.is_ground(),
            Cond::Not(a) => a.is_ground(),
            Cond::Ite(c, a, b) => c.is_ground() && a.is_ground() && b.is_ground(),
            Cond::AppB(..) => false,
            Cond::True | Cond::False => true,
        }
    }

    pub fn subst_vars(&self, images: &[Term]) -> Cond {
        match self {
            Cond::Geq(a, b) => Cond::geq(a.subst_vars(images), b.subst_vars(images)),
            Cond::And(a, b) => Cond::and(a.subst_vars(images), b.subst_vars(images)),
            Cond::Or(a, b) => Cond::or(a.subst_vars(images), b.subst_vars(images)),
            Cond::Not(a) => Cond::not(a.subst_vars(images)),
            Cond::Ite(c, a, b) => Cond::ite(c.subst_vars(images), a.subst_vars(images), b.subst_vars(images)),
            Cond::AppB(f, args) => Cond::AppB(f.clone(), args.iter().map(|a| a.subst_vars(images)).collect()),
            Cond::True | Cond::False => self.clone(),
        }
    }

    pub fn map_apps(&self, on_int: &mut dyn FnMut(&Symbol, &[Term]) -> Option<Term>, on_bool: &mut dyn FnMut(&Symbol, &[Term]) -> Option<Cond>) -> Cond {
        match self {
            Cond::Geq(a, b) => Cond::geq(a.map_apps(on_int, on_bool), b.map_apps(on_int, on_bool)),
            Cond::And(a, b) => Cond::and(a.map_apps(on_int, on_bool), b.map_apps(on_int, on_bool)),
            Cond::Or(a, b) => Cond::or(a.map_apps(on_int, on_bool), b.map_apps(on_int, on_bool)),
            Cond::Not(a) => Cond::not(a.map_apps(on_int, on_bool)),
            Cond::Ite(c, a, b) => Cond::ite(
                c.map_apps(on_int, on_bool),
                a.map_apps(on_int, on_bool),
                b.map_apps(on_int, on_bool),
            ),
            Cond::AppB(f, args) => {
                let args: Vec<Term> = args.iter().map(|a| a.map_apps(on_int, on_bool)).collect();
                on_bool(f, &args).unwrap_or(Cond::AppB(f.clone(), args))
            }
            Cond::True | Cond::False => self.clone(),
        }
    }

    pub fn visit_apps<'a>(&'a self, visit: &mut dyn FnMut(&'a Symbol, &'a [Term])) {
        match self {
            Cond::Geq(a, b) => {
                a.visit_apps(visit);
                b.visit_apps(visit);
            }
            Cond::And(a, b) | Cond::Or(a, b) => {
                a.visit_apps(visit);
                b.visit_apps(visit);
            }
            Cond::Not(a) => a.visit_apps(visit),
            Cond::Ite(c, a, b) => {
                c.visit_apps(visit);
                a.visit_apps(visit);
                b.visit_apps(visit);
            }
            Cond::AppB(f, args) => {
                visit(f, args);
                for a in args {
                    a.visit_apps(visit);
                }
            }
            Cond::True | Cond::False => {}
        }
    }

    /// Number of applications of `f` anywhere in the condition.
    pub fn count_apps(&self, f: &str) -> usize {
        let mut n = 0;
        self.visit_apps(&mut |g, _| {
            if &**g == f {
                n += 1
            }
        });
        n
    }

    pub fn collect_vars(&self, out: &mut Vec<usize>) {
        match self {
            Cond::Geq(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Cond::And(a, b) | Cond::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Cond::Not(a) => a.collect_vars(out),
            Cond::Ite(c, a, b) => {
                c.collect_vars(out);
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Cond::AppB(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            Cond::True | Cond::False => {}
        }
    }

    /// Rewrites `Or`, `Ite`, `True` and `False` into the `∧ / ¬ / ≥` core.
    pub fn to_base(&self) -> Cond {
        match self {
            Cond::Geq(a, b) => Cond::geq(term_to_base(a), term_to_base(b)),
            Cond::And(a, b) => Cond::and(a.to_base(), b.to_base()),
            Cond::Or(a, b) => Cond::not(Cond::and(Cond::not(a.to_base()), Cond::not(b.to_base()))),
            Cond::Not(a) => Cond::not(a.to_base()),
            Cond::Ite(c, a, b) => {
                let c = c.to_base();
                Cond::not(Cond::and(
                    Cond::not(Cond::and(c.clone(), a.to_base())),
                    Cond::not(Cond::and(Cond::not(c), b.to_base())),
                ))
            }
            Cond::AppB(f, args) => Cond::AppB(f.clone(), args.iter().map(term_to_base).collect()),
            Cond::True => Cond::geq(Term::int(0), Term::int(0)),
            Cond::False => Cond::geq(Term::int(0), Term::int(1)),
        }
    }

    /// Constant folding: closed comparisons, unit laws, double negation.
    pub fn simplify(&self) -> Cond {
        match self {
            Cond::Geq(a, b) => {
                let (a, b) = (a.simplify(), b.simplify());
                if let (Some(la), Some(lb)) = (a.as_linear(), b.as_linear()) {
                    let d = &la - &lb;
                    if d.is_constant() {
                        return if d.offset().is_negative() { Cond::False } else { Cond::True };
                    }
                }
                Cond::geq(a, b)
            }
            Cond::And(a, b) => match (a.simplify(), b.simplify()) {
                (Cond::False, _) | (_, Cond::False) => Cond::False,
                (Cond::True, x) | (x, Cond::True) => x,
                (x, y) if x == y => x,
                (x, y) => Cond::and(x, y),
            },
            Cond::Or(a, b) => match (a.simplify(), b.simplify()) {
                (Cond::True, _) | (_, Cond::True) => Cond::True,
                (Cond::False, x) | (x, Cond::False) => x,
                (x, y) if x == y => x,
                (x, y) => Cond::or(x, y),
            },
            Cond::Not(a) => match a.simplify() {
                Cond::True => Cond::False,
                Cond::False => Cond::True,
                Cond::Not(inner) => *inner,
                x => Cond::not(x),
            },
            Cond::Ite(c, a, b) => match c.simplify() {
                Cond::True => a.simplify(),
                Cond::False => b.simplify(),
                c => {
                    let (a, b) = (a.simplify(), b.simplify());
                    if a == b {
                        a
                    } else {
                        Cond::ite(c, a, b)
                    }
                }
            },
            Cond::AppB(f, args) => Cond::AppB(f.clone(), args.iter().map(Term::simplify).collect()),
            Cond::True | Cond::False => self.clone(),
        }
    }

    /// Top-level conjuncts with nested `And`s flattened.
    pub fn conjuncts(&self) -> Vec<&Cond> {
        let mut out = Vec::new();
        fn go<'a>(c: &'a Cond, out: &mut Vec<&'a Cond>) {
            match c {
                Cond::And(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                Cond::True => {}
                other => out.push(other),
            }
        }
        go(self, &mut out);
        out
    }

    pub fn size(&self) -> usize {
        match self {
            Cond::Geq(a, b) => 1 + a.size() + b.size(),
            Cond::And(a, b) | Cond::Or(a, b) => 1 + a.size() + b.size(),
            Cond::Not(a) => 1 + a.size(),
            Cond::Ite(c, a, b) => 1 + c.size() + a.size() + b.size(),
            Cond::AppB(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
            Cond::True | Cond::False => 1,
        }
    }
}

fn term_to_base(t: &Term) -> Term {
    match t {
        Term::Const(_) | Term::Var(_) => t.clone(),
        Term::Add(a, b) => Term::add(term_to_base(a), term_to_base(b)),
        Term::Mul(k, t) => Term::Mul(k.clone(), Box::new(term_to_base(t))),
        Term::Ite(c, a, b) => Term::ite(c.to_base(), term_to_base(a), term_to_base(b)),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(term_to_base).collect()),
    }
}

// Debug-oriented infix rendering; SyGuS output lives in `sygus::printer`.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => write!(f, "{c}"),
            Term::Var(i) => write!(f, "x{i}"),
            Term::Add(a, b) => write!(f, "({a} + {b})"),
            Term::Mul(k, t) => write!(f, "{k}*{t}"),
            Term::Ite(c, a, b) => write!(f, "ite({c}, {a}, {b})"),
            Term::App(g, args) => {
                write!(f, "{g}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cond::Geq(a, b) => write!(f, "{a} >= {b}"),
            Cond::And(a, b) => write!(f, "({a} && {b})"),
            Cond::Or(a, b) => write!(f, "({a} || {b})"),
            Cond::Not(a) => write!(f, "!({a})"),
            Cond::Ite(c, a, b) => write!(f, "ite({c}, {a}, {b})"),
            Cond::AppB(g, args) => write!(f, "{}", Term::App(g.clone(), args.clone())),
            Cond::True => write!(f, "true"),
            Cond::False => write!(f, "false"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vals(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn max2() -> Term {
        Term::ite(Cond::geq(Term::var(0), Term::var(1)), Term::var(0), Term::var(1))
    }

    #[test]
    fn eval_addition() {
        let t = Term::add(Term::var(0), Term::var(1));
        assert_eq!(t.eval(&vals(&[3, 4])).unwrap(), BigInt::from(7));
    }

    #[test]
    fn eval_max2() {
        assert_eq!(max2().eval(&vals(&[1, 2])).unwrap(), BigInt::from(2));
        assert_eq!(max2().eval(&vals(&[5, 5])).unwrap(), BigInt::from(5));
    }

    #[test]
    fn eval_rejects_applications() {
        let f: Symbol = "f".into();
        let t = Term::app(&f, vec![Term::var(0)]);
        assert!(matches!(t.eval(&vals(&[1])), Err(CliaError::UngroundedTerm(_))));
    }

    #[test]
    fn eval_with_interprets_applications() {
        let f: Symbol = "f".into();
        let t = Term::add(Term::app(&f, vec![Term::var(0)]), Term::int(1));
        let double = |_: &Symbol, args: &[BigInt]| Some(Value::Int(&args[0] * 2));
        assert_eq!(t.eval_with(&vals(&[4]), &double).unwrap(), BigInt::from(9));
    }

    #[test]
    fn to_base_preserves_truth() {
        let c = Cond::or(
            Cond::ite(Cond::gt(Term::var(0), Term::int(0)), Cond::True, Cond::lt(Term::var(1), Term::var(0))),
            Cond::False,
        );
        let base = c.to_base();
        fn core_only(c: &Cond) -> bool {
            match c {
                Cond::Geq(..) => true,
                Cond::And(a, b) => core_only(a) && core_only(b),
                Cond::Not(a) => core_only(a),
                _ => false,
            }
        }
        assert!(core_only(&base));
        for x in -3..=3 {
            for y in -3..=3 {
                let v = vals(&[x, y]);
                assert_eq!(c.eval(&v).unwrap(), base.eval(&v).unwrap());
            }
        }
    }

    #[test]
    fn simplify_folds_trivial_guards() {
        let c = Cond::geq(Term::var(0), Term::var(0));
        assert_eq!(c.simplify(), Cond::True);
        let t = Term::ite(c, Term::var(0), Term::int(0));
        assert_eq!(t.simplify(), Term::var(0));
    }

    #[test]
    fn subst_vars_replaces_formals() {
        let swapped = max2().subst_vars(&[Term::var(1), Term::var(0)]);
        assert_eq!(swapped.eval(&vals(&[1, 2])).unwrap(), BigInt::from(2));
        assert_eq!(
            swapped,
            Term::ite(Cond::geq(Term::var(1), Term::var(0)), Term::var(1), Term::var(0))
        );
    }
}
