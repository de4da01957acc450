use num_bigint::BigInt;
use num_traits::Signed;

use super::SynthProblem;
use crate::clia::{Body, Cond, Term};
use crate::smt::print::symbol;

fn numeral(n: &BigInt) -> String {
    if n.is_negative() {
        format!("(- {})", -n)
    } else {
        n.to_string()
    }
}

fn minus_one() -> BigInt {
    BigInt::from(-1)
}

/// SyGuS rendering of a term; `Var(i)` prints as `names[i]`.
pub fn term_sexp(t: &Term, names: &[String]) -> String {
    match t {
        Term::Const(c) => numeral(c),
        Term::Var(i) => names.get(*i).map(|n| symbol(n)).unwrap_or_else(|| format!("x{i}")),
        Term::Add(a, b) => match &**b {
            Term::Mul(k, inner) if *k == minus_one() => {
                format!("(- {} {})", term_sexp(a, names), term_sexp(inner, names))
            }
            _ => format!("(+ {} {})", term_sexp(a, names), term_sexp(b, names)),
        },
        Term::Mul(k, inner) if *k == minus_one() && !matches!(**inner, Term::Const(_)) => {
            format!("(- {})", term_sexp(inner, names))
        }
        Term::Mul(k, inner) => format!("(* {} {})", numeral(k), term_sexp(inner, names)),
        Term::Ite(c, a, b) => format!("(ite {} {} {})", cond_sexp(c, names), term_sexp(a, names), term_sexp(b, names)),
        Term::App(f, args) => app(f, args, names),
    }
}

fn app(f: &str, args: &[Term], names: &[String]) -> String {
    if args.is_empty() {
        return symbol(f);
    }
    let args: Vec<String> = args.iter().map(|a| term_sexp(a, names)).collect();
    format!("({} {})", symbol(f), args.join(" "))
}

pub fn cond_sexp(c: &Cond, names: &[String]) -> String {
    match c {
        Cond::Geq(a, b) => format!("(>= {} {})", term_sexp(a, names), term_sexp(b, names)),
        Cond::And(a, b) => format!("(and {} {})", cond_sexp(a, names), cond_sexp(b, names)),
        Cond::Or(a, b) => format!("(or {} {})", cond_sexp(a, names), cond_sexp(b, names)),
        Cond::Not(a) => format!("(not {})", cond_sexp(a, names)),
        Cond::Ite(g, a, b) => format!("(ite {} {} {})", cond_sexp(g, names), cond_sexp(a, names), cond_sexp(b, names)),
        Cond::AppB(f, args) => app(f, args, names),
        Cond::True => "true".into(),
        Cond::False => "false".into(),
    }
}

pub fn body_sexp(b: &Body, names: &[String]) -> String {
    match b {
        Body::Int(t) => term_sexp(t, names),
        Body::Bool(c) => cond_sexp(c, names),
    }
}

/// `(define-fun f ((x Int) ...) Sort body)` over the function's own
/// parameter names.
pub fn print_solution(p: &SynthProblem, body: &Body) -> String {
    let params: Vec<String> = p.params.iter().map(|n| format!("({} Int)", symbol(n))).collect();
    let sort = match body {
        Body::Int(_) => "Int",
        Body::Bool(_) => "Bool",
    };
    format!("(define-fun {} ({}) {sort} {})", symbol(&p.fname), params.join(" "), body_sexp(body, &p.params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sygus::{parse_define_fun, Sort, SynthProblem, Track};

    fn problem(name: &str, params: &[&str], ret: Sort) -> SynthProblem {
        SynthProblem {
            fname: name.into(),
            params: params.iter().map(|s| s.to_string()).collect(),
            ret,
            vars: Vec::new(),
            spec: Cond::True,
            track: Track::Clia,
            inv_parts: None,
            grammar: None,
            warnings: Vec::new(),
        }
    }

    #[test]
    fn prints_max2() {
        let body = Body::Int(Term::ite(
            Cond::geq(Term::sub(Term::var(0), Term::var(1)), Term::int(0)),
            Term::var(0),
            Term::var(1),
        ));
        let p = problem("max2", &["x", "y"], Sort::Int);
        assert_eq!(print_solution(&p, &body), "(define-fun max2 ((x Int) (y Int)) Int (ite (>= (- x y) 0) x y))");
    }

    #[test]
    fn prints_constants_and_invariants() {
        assert_eq!(print_solution(&problem("f", &["x"], Sort::Int), &Body::Int(Term::int(0))), "(define-fun f ((x Int)) Int 0)");
        let inv = Body::Bool(Cond::geq(Term::var(0), Term::int(0)));
        assert_eq!(print_solution(&problem("inv", &["x"], Sort::Bool), &inv), "(define-fun inv ((x Int)) Bool (>= x 0))");
    }

    #[test]
    fn round_trips_through_the_parser() {
        let x = || Term::var(0);
        let y = || Term::var(1);
        let bodies = vec![
            Body::Int(Term::add(Term::mul(-1, x()), Term::int(-3))),
            Body::Int(Term::mul(-1, Term::int(3))),
            Body::Int(Term::sub(x(), Term::int(4))),
            Body::Int(Term::mul(-2, Term::sub(x(), y()))),
            Body::Int(Term::ite(Cond::not(Cond::geq(x(), y())), Term::mul(-1, Term::int(-5)), Term::int(-7))),
            Body::Bool(Cond::ite(
                Cond::or(Cond::True, Cond::geq(x(), Term::int(1))),
                Cond::and(Cond::False, Cond::geq(y(), x())),
                Cond::not(Cond::geq(Term::mul(3, y()), Term::int(0))),
            )),
        ];
        for b in bodies {
            let p = problem("f", &["x", "y"], Sort::Int);
            let text = print_solution(&p, &b);
            let (name, params, back) = parse_define_fun(&text).unwrap();
            assert_eq!(name, "f");
            assert_eq!(params, vec!["x", "y"]);
            assert_eq!(back, b, "{text}");
        }
    }
}
