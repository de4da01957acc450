//! SMT-LIB2 rendering of terms, conditions and extended conditions.

use std::fmt::Write;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::clia::{Atom, Cond, ExtCond, Formula, LinExpr, Term};

const RESERVED: &[&str] = &[
    "!", "_", "as", "assert", "check-sat", "declare-const", "declare-fun", "define-fun", "exists", "forall", "let",
    "match", "par", "push", "pop", "reset", "set-logic", "set-option", "get-value", "NUMERAL", "DECIMAL", "STRING",
];

/// Renders a symbol, quoting it with bars when it is not a simple symbol.
pub fn symbol(name: &str) -> String {
    let simple = !name.is_empty()
        && !name.chars().next().unwrap().is_ascii_digit()
        && name.chars().all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c))
        && !RESERVED.contains(&name);
    if simple {
        name.to_string()
    } else {
        format!("|{name}|")
    }
}

pub fn numeral(n: &BigInt) -> String {
    if n.is_negative() {
        format!("(- {})", -n)
    } else {
        n.to_string()
    }
}

pub fn term(t: &Term, names: &[String]) -> String {
    let mut out = String::new();
    write_term(t, names, &mut out);
    out
}

pub fn cond(c: &Cond, names: &[String]) -> String {
    let mut out = String::new();
    write_cond(c, names, &mut out);
    out
}

pub fn ext_cond(c: &ExtCond, names: &[String]) -> String {
    let mut out = String::new();
    write_ext(c, names, &mut out);
    out
}

fn var_name(i: usize, names: &[String]) -> String {
    match names.get(i) {
        Some(n) => symbol(n),
        None => symbol(&format!("v{i}")),
    }
}

pub fn write_term(t: &Term, names: &[String], out: &mut String) {
    match t {
        Term::Const(c) => out.push_str(&numeral(c)),
        Term::Var(i) => out.push_str(&var_name(*i, names)),
        Term::Add(a, b) => {
            out.push_str("(+ ");
            write_term(a, names, out);
            out.push(' ');
            write_term(b, names, out);
            out.push(')');
        }
        Term::Mul(k, t) => {
            out.push_str("(* ");
            out.push_str(&numeral(k));
            out.push(' ');
            write_term(t, names, out);
            out.push(')');
        }
        Term::Ite(c, a, b) => {
            out.push_str("(ite ");
            write_cond(c, names, out);
            out.push(' ');
            write_term(a, names, out);
            out.push(' ');
            write_term(b, names, out);
            out.push(')');
        }
        Term::App(f, args) => write_app(f, args, names, out),
    }
}

fn write_app(f: &str, args: &[Term], names: &[String], out: &mut String) {
    if args.is_empty() {
        out.push_str(&symbol(f));
        return;
    }
    out.push('(');
    out.push_str(&symbol(f));
    for a in args {
        out.push(' ');
        write_term(a, names, out);
    }
    out.push(')');
}

pub fn write_cond(c: &Cond, names: &[String], out: &mut String) {
    match c {
        Cond::Geq(a, b) => {
            out.push_str("(>= ");
            write_term(a, names, out);
            out.push(' ');
            write_term(b, names, out);
            out.push(')');
        }
        // `a ≥ b ∧ b ≥ a` is how equality is represented; print it as one.
        Cond::And(l, r) if matches!((&**l, &**r), (Cond::Geq(a, b), Cond::Geq(b2, a2)) if a == a2 && b == b2) => {
            let Cond::Geq(a, b) = &**l else { unreachable!() };
            out.push_str("(= ");
            write_term(a, names, out);
            out.push(' ');
            write_term(b, names, out);
            out.push(')');
        }
        Cond::And(a, b) | Cond::Or(a, b) => {
            out.push_str(if matches!(c, Cond::And(..)) { "(and " } else { "(or " });
            write_cond(a, names, out);
            out.push(' ');
            write_cond(b, names, out);
            out.push(')');
        }
        Cond::Not(a) => {
            out.push_str("(not ");
            write_cond(a, names, out);
            out.push(')');
        }
        Cond::Ite(g, a, b) => {
            out.push_str("(ite ");
            write_cond(g, names, out);
            out.push(' ');
            write_cond(a, names, out);
            out.push(' ');
            write_cond(b, names, out);
            out.push(')');
        }
        Cond::AppB(f, args) => write_app(f, args, names, out),
        Cond::True => out.push_str("true"),
        Cond::False => out.push_str("false"),
    }
}

pub fn linexpr(e: &LinExpr, names: &[String]) -> String {
    let mut parts: Vec<String> = Vec::new();
    for i in e.vars() {
        let c = e.coeff(i);
        let v = var_name(i, names);
        if c == BigInt::from(1) {
            parts.push(v);
        } else {
            parts.push(format!("(* {} {v})", numeral(&c)));
        }
    }
    if !e.offset().is_zero() || parts.is_empty() {
        parts.push(numeral(e.offset()));
    }
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        format!("(+ {})", parts.join(" "))
    }
}

/// `e ≥ 0 ∧ −e ≥ 0`.
fn is_equality(items: &[ExtCond]) -> bool {
    match items {
        [Formula::Atom(Atom::Geq(a)), Formula::Atom(Atom::Geq(b))] => *a == -b,
        _ => false,
    }
}

pub fn write_ext(c: &ExtCond, names: &[String], out: &mut String) {
    match c {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Atom(Atom::Geq(e)) => {
            let _ = write!(out, "(>= {} 0)", linexpr(e, names));
        }
        Formula::Atom(Atom::Mod { expr, modulus, residue }) => {
            let _ = write!(out, "(= (mod {} {modulus}) {residue})", linexpr(expr, names));
        }
        Formula::And(items) if is_equality(items) => {
            let Formula::Atom(Atom::Geq(e)) = &items[0] else { unreachable!() };
            let _ = write!(out, "(= {} 0)", linexpr(e, names));
        }
        Formula::Not(inner) => {
            out.push_str("(not ");
            write_ext(inner, names, out);
            out.push(')');
        }
        Formula::And(items) | Formula::Or(items) => {
            out.push_str(if matches!(c, Formula::And(_)) { "(and" } else { "(or" });
            for i in items {
                out.push(' ');
                write_ext(i, names, out);
            }
            out.push(')');
        }
    }
}
