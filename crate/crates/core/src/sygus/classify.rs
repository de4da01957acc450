use super::{Sort, SynthProblem, Track};
use crate::clia::{Cond, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProblemClass {
    /// Every occurrence of the function is `f(args)`, at most once per atom.
    Ssi { args: Vec<Term> },
    /// `f(a,b) = f(b,a)` conjoined with an SSI remainder.
    SsiCommutative,
    /// Invariant problem with a translational loop body.
    At,
    General,
}

impl ProblemClass {
    pub fn tag(&self) -> &'static str {
        match self {
            ProblemClass::Ssi { .. } => "SSI",
            ProblemClass::SsiCommutative => "SSI_Commutative",
            ProblemClass::At => "AT",
            ProblemClass::General => "General",
        }
    }
}

/// The pieces of a commutative SSI specification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Commutative {
    /// Variable indices of the two arguments, as in `f(x_a, x_b)`.
    pub a: usize,
    pub b: usize,
    /// The specification without the commutativity conjunct.
    pub rest: Cond,
}

pub fn classify(p: &SynthProblem) -> ProblemClass {
    if p.track == Track::Inv {
        return if crate::at::detect_translational(p).is_ok() { ProblemClass::At } else { ProblemClass::General };
    }
    if let Some(args) = ssi_invocation(&p.spec, &p.fname) {
        return ProblemClass::Ssi { args };
    }
    if split_commutative(p).is_some() {
        return ProblemClass::SsiCommutative;
    }
    ProblemClass::General
}

/// The single invocation `f(t)` of an SSI specification, if there is one.
pub fn ssi_invocation(spec: &Cond, f: &str) -> Option<Vec<Term>> {
    let mut args: Option<&[Term]> = None;
    let mut ok = true;
    spec.visit_apps(&mut |g, a| {
        if &**g != f {
            return;
        }
        if a.iter().any(|t| !t.is_ground()) {
            ok = false;
        }
        match args {
            None => args = Some(a),
            Some(prev) if prev == a => {}
            Some(_) => ok = false,
        }
    });
    let args = args?.to_vec();
    (ok && at_most_once_per_atom(spec, f)).then_some(args)
}

fn at_most_once_per_atom(c: &Cond, f: &str) -> bool {
    match c {
        Cond::Geq(..) | Cond::AppB(..) => c.count_apps(f) <= 1,
        Cond::And(a, b) | Cond::Or(a, b) => at_most_once_per_atom(a, f) && at_most_once_per_atom(b, f),
        Cond::Not(a) => at_most_once_per_atom(a, f),
        Cond::Ite(g, a, b) => [g, a, b].iter().all(|x| at_most_once_per_atom(x, f)),
        Cond::True | Cond::False => true,
    }
}

fn app_vars(t: &Term, f: &str) -> Option<(usize, usize)> {
    match t {
        Term::App(g, args) if &**g == f => match args.as_slice() {
            [Term::Var(a), Term::Var(b)] if a != b => Some((*a, *b)),
            _ => None,
        },
        _ => None,
    }
}

/// Recognizes `f(x_a, x_b) = f(x_b, x_a) ∧ ψ` with `ψ` SSI on `f(x_a, x_b)`.
pub fn split_commutative(p: &SynthProblem) -> Option<Commutative> {
    if p.arity() != 2 || p.ret != Sort::Int {
        return None;
    }
    let f = p.fname.as_str();
    let conj = p.spec.conjuncts();
    let mut found = None;
    let mut rest = Vec::new();
    let mut i = 0;
    while i < conj.len() {
        // Equality desugars to two opposite inequalities, possibly split
        // across adjacent conjuncts.
        let pair = match conj[i] {
            Cond::Geq(l, r) => conj.get(i + 1).and_then(|next| match next {
                Cond::Geq(l2, r2) if l2 == r && r2 == l => Some((&**l, &**r, 2)),
                _ => None,
            }),
            _ => None,
        };
        if let (None, Some((l, r, width))) = (&found, pair) {
            if let (Some((a, b)), Some((b2, a2))) = (app_vars(l, f), app_vars(r, f)) {
                if a == a2 && b == b2 {
                    found = Some((a, b));
                    i += width;
                    continue;
                }
            }
        }
        rest.push(conj[i].clone());
        i += 1;
    }
    let (a, b) = found?;
    let rest = Cond::and_all(rest);
    let args = ssi_invocation(&rest, f)?;
    let ordered = args == vec![Term::Var(a), Term::Var(b)];
    let swapped = args == vec![Term::Var(b), Term::Var(a)];
    if ordered {
        Some(Commutative { a, b, rest })
    } else if swapped {
        Some(Commutative { a: b, b: a, rest })
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sygus::parse;

    fn clia(fun: &str, constraints: &[&str]) -> SynthProblem {
        let mut text = format!("(set-logic LIA)\n{fun}\n(declare-var x Int)\n(declare-var y Int)\n");
        for c in constraints {
            text.push_str(&format!("(constraint {c})\n"));
        }
        text.push_str("(check-synth)\n");
        parse(&text).unwrap()
    }

    #[test]
    fn max2_is_ssi() {
        let p = clia(
            "(synth-fun max2 ((a Int) (b Int)) Int)",
            &["(>= (max2 x y) x)", "(>= (max2 x y) y)", "(or (= x (max2 x y)) (= y (max2 x y)))"],
        );
        assert_eq!(classify(&p), ProblemClass::Ssi { args: vec![Term::var(0), Term::var(1)] });
    }

    #[test]
    fn double_application_in_one_atom_is_general() {
        let p = clia("(synth-fun f ((a Int)) Int)", &["(= (+ (f x) (f x)) (* 4 x))"]);
        assert_eq!(classify(&p), ProblemClass::General);
    }

    #[test]
    fn different_arguments_are_general() {
        let p = clia("(synth-fun f ((a Int)) Int)", &["(>= (f x) 0)", "(>= (f y) 1)"]);
        assert_eq!(classify(&p), ProblemClass::General);
    }

    #[test]
    fn commutative_spec_is_detected() {
        let p = clia(
            "(synth-fun f ((a Int) (b Int)) Int)",
            &["(= (f x y) (f y x))", "(>= (f x y) x)", "(>= (f x y) y)", "(or (= (f x y) x) (= (f x y) y))"],
        );
        assert_eq!(classify(&p), ProblemClass::SsiCommutative);
        let c = split_commutative(&p).unwrap();
        assert_eq!((c.a, c.b), (0, 1));
        assert_eq!(c.rest.conjuncts().len(), 3);
    }
}
