use std::collections::HashMap;

use num_bigint::BigInt;

use super::{GrammarSummary, InvParts, Sort, SygusError, SynthProblem, Track};
use crate::clia::{Body, Cond, Symbol, Term};
use crate::sexp::{self, Pos, Sexp};

#[derive(Clone, Debug)]
enum Expr {
    Int(Term),
    Bool(Cond),
}

#[derive(Clone, Debug)]
struct Macro {
    params: Vec<String>,
    body: Expr,
}

struct Target {
    name: String,
    params: Vec<String>,
    ret: Sort,
    grammar: Option<GrammarSummary>,
}

#[derive(Default)]
struct Env {
    macros: HashMap<String, Macro>,
    target: Option<Target>,
    vars: Vec<String>,
    constraints: Vec<Cond>,
    inv_constraint: Option<(Pos, [String; 4])>,
    warnings: Vec<String>,
}

fn parse_err(pos: Pos, message: impl Into<String>) -> SygusError {
    SygusError::Parse { line: pos.line, col: pos.col, message: message.into() }
}

fn unsupported(pos: Pos, message: impl Into<String>) -> SygusError {
    SygusError::Unsupported { line: pos.line, col: pos.col, message: message.into() }
}

fn atom_of(s: &Sexp, what: &str) -> Result<String, SygusError> {
    s.as_atom().map(str::to_string).ok_or_else(|| parse_err(s.pos(), format!("expected {what}")))
}

fn parse_sort(s: &Sexp) -> Result<Sort, SygusError> {
    match s.as_atom() {
        Some("Int") => Ok(Sort::Int),
        Some("Bool") => Ok(Sort::Bool),
        Some(other) => Err(unsupported(s.pos(), format!("sort `{other}`"))),
        None => Err(unsupported(s.pos(), format!("sort `{s}`"))),
    }
}

/// `((x Int) (y Int))` with integer parameters only.
fn parse_params(s: &Sexp) -> Result<Vec<String>, SygusError> {
    let list = s.as_list().ok_or_else(|| parse_err(s.pos(), "expected a parameter list"))?;
    list.iter()
        .map(|p| match p.as_list() {
            Some([name, sort]) => {
                let name = atom_of(name, "parameter name")?;
                match parse_sort(sort)? {
                    Sort::Int => Ok(name),
                    Sort::Bool => Err(unsupported(sort.pos(), "Bool-sorted parameters")),
                }
            }
            _ => Err(parse_err(p.pos(), "expected (name Sort)")),
        })
        .collect()
}

fn summarize_grammar(items: &[Sexp]) -> GrammarSummary {
    let mut s = GrammarSummary { has_ite: false, has_comparison: false };
    fn walk(e: &Sexp, s: &mut GrammarSummary) {
        match e {
            Sexp::Atom(a, _) => match a.as_str() {
                "ite" => s.has_ite = true,
                ">=" | "<=" | ">" | "<" | "=" => s.has_comparison = true,
                _ => {}
            },
            Sexp::List(items, _) => items.iter().for_each(|i| walk(i, s)),
            Sexp::Str(..) => {}
        }
    }
    items.iter().for_each(|i| walk(i, &mut s));
    s
}

/// Parses a problem in the supported SyGuS subset.
pub fn parse(text: &str) -> Result<SynthProblem, SygusError> {
    let cmds = sexp::parse_all(text)?;
    let mut env = Env::default();
    let mut saw_check = false;
    for cmd in &cmds {
        let items = cmd.as_list().ok_or_else(|| parse_err(cmd.pos(), "expected a command"))?;
        let head = items.first().and_then(Sexp::as_atom).ok_or_else(|| parse_err(cmd.pos(), "expected a command"))?;
        let args = &items[1..];
        match head {
            "set-logic" => {
                let logic = args.first().and_then(Sexp::as_atom).unwrap_or("");
                if !matches!(logic, "LIA" | "QF_LIA" | "CLIA" | "ALL") {
                    return Err(SygusError::UnsupportedLogic(logic.to_string()));
                }
            }
            "set-option" | "set-info" | "set-feature" => {}
            "check-synth" => saw_check = true,
            "synth-fun" | "synth-inv" => {
                if env.target.is_some() {
                    return Err(unsupported(cmd.pos(), "more than one function to synthesize"));
                }
                let name = atom_of(args.first().ok_or_else(|| parse_err(cmd.pos(), "missing name"))?, "function name")?;
                let params = parse_params(args.get(1).ok_or_else(|| parse_err(cmd.pos(), "missing parameters"))?)?;
                let (ret, rest) = if head == "synth-inv" {
                    (Sort::Bool, &args[2..])
                } else {
                    let s = args.get(2).ok_or_else(|| parse_err(cmd.pos(), "missing return sort"))?;
                    (parse_sort(s)?, &args[3..])
                };
                let grammar = (!rest.is_empty()).then(|| summarize_grammar(rest));
                if grammar.is_some() {
                    env.warnings.push(format!("grammar of `{name}` is ignored; searching all of CLIA"));
                }
                env.target = Some(Target { name, params, ret, grammar });
            }
            "declare-var" | "declare-primed-var" => {
                let [name, sort] = args else { return Err(parse_err(cmd.pos(), "expected (declare-var name Sort)")) };
                let name = atom_of(name, "variable name")?;
                if parse_sort(sort)? != Sort::Int {
                    return Err(unsupported(sort.pos(), "Bool-sorted universal variables"));
                }
                let mut names = vec![name.clone()];
                if head == "declare-primed-var" {
                    names.push(format!("{name}!"));
                }
                for n in names {
                    if env.vars.contains(&n) {
                        return Err(parse_err(cmd.pos(), format!("variable `{n}` declared twice")));
                    }
                    env.vars.push(n);
                }
            }
            "define-fun" => {
                let [name, params, sort, body] = args else {
                    return Err(parse_err(cmd.pos(), "expected (define-fun name params Sort body)"));
                };
                let name = atom_of(name, "function name")?;
                let params = parse_params(params)?;
                let sort = parse_sort(sort)?;
                let body = env.expr(body, &params)?;
                check_sort(&body, sort, cmd.pos())?;
                env.macros.insert(name, Macro { params, body });
            }
            "constraint" => {
                let [c] = args else { return Err(parse_err(cmd.pos(), "expected (constraint term)")) };
                let vars = env.vars.clone();
                match env.expr(c, &vars)? {
                    Expr::Bool(b) => env.constraints.push(b),
                    Expr::Int(_) => return Err(parse_err(c.pos(), "constraint must be Boolean")),
                }
            }
            "inv-constraint" => {
                let names: Vec<String> = args.iter().map(|a| atom_of(a, "function name")).collect::<Result<_, _>>()?;
                let Ok(names) = <[String; 4]>::try_from(names) else {
                    return Err(parse_err(cmd.pos(), "expected (inv-constraint inv pre trans post)"));
                };
                env.inv_constraint = Some((cmd.pos(), names));
            }
            "declare-fun" | "declare-datatypes" | "define-sort" | "synth-blocklist" => {
                return Err(unsupported(cmd.pos(), format!("command `{head}`")))
            }
            other => return Err(parse_err(cmd.pos(), format!("unknown command `{other}`"))),
        }
    }
    if !saw_check {
        env.warnings.push("missing (check-synth)".into());
    }
    env.finish()
}

fn check_sort(e: &Expr, want: Sort, pos: Pos) -> Result<(), SygusError> {
    match (e, want) {
        (Expr::Int(_), Sort::Int) | (Expr::Bool(_), Sort::Bool) => Ok(()),
        _ => Err(parse_err(pos, format!("body does not have sort {want}"))),
    }
}

fn parse_numeral(s: &str) -> Option<BigInt> {
    (s.chars().all(|c| c.is_ascii_digit()) && !s.is_empty()).then(|| s.parse().ok()).flatten()
}

/// A literal integer constant: `5` or `(- 5)`.
fn literal(s: &Sexp) -> Option<BigInt> {
    match s {
        Sexp::Atom(a, _) => parse_numeral(a),
        Sexp::List(items, _) => match items.as_slice() {
            [op, Sexp::Atom(a, _)] if op.is_atom("-") => parse_numeral(a).map(|n| -n),
            _ => None,
        },
        Sexp::Str(..) => None,
    }
}

impl Env {
    fn int(&self, s: &Sexp, scope: &[String]) -> Result<Term, SygusError> {
        match self.expr(s, scope)? {
            Expr::Int(t) => Ok(t),
            Expr::Bool(_) => Err(parse_err(s.pos(), format!("expected an Int term, found `{s}`"))),
        }
    }

    fn bool(&self, s: &Sexp, scope: &[String]) -> Result<Cond, SygusError> {
        match self.expr(s, scope)? {
            Expr::Bool(c) => Ok(c),
            Expr::Int(_) => Err(parse_err(s.pos(), format!("expected a Bool term, found `{s}`"))),
        }
    }

    fn apply_named(&self, name: &str, args: Vec<Term>, pos: Pos) -> Result<Option<Expr>, SygusError> {
        if let Some(t) = &self.target {
            if t.name == name {
                if args.len() != t.params.len() {
                    return Err(parse_err(pos, format!("`{name}` expects {} arguments", t.params.len())));
                }
                let f = Symbol::from(name);
                return Ok(Some(match t.ret {
                    Sort::Int => Expr::Int(Term::App(f, args)),
                    Sort::Bool => Expr::Bool(Cond::AppB(f, args)),
                }));
            }
        }
        if let Some(m) = self.macros.get(name) {
            if args.len() != m.params.len() {
                return Err(parse_err(pos, format!("`{name}` expects {} arguments", m.params.len())));
            }
            return Ok(Some(match &m.body {
                Expr::Int(t) => Expr::Int(t.subst_vars(&args)),
                Expr::Bool(c) => Expr::Bool(c.subst_vars(&args)),
            }));
        }
        Ok(None)
    }

    fn expr(&self, s: &Sexp, scope: &[String]) -> Result<Expr, SygusError> {
        let pos = s.pos();
        match s {
            Sexp::Str(..) => Err(unsupported(pos, "string literal")),
            Sexp::Atom(a, _) => {
                if let Some(n) = parse_numeral(a) {
                    return Ok(Expr::Int(Term::Const(n)));
                }
                match a.as_str() {
                    "true" => return Ok(Expr::Bool(Cond::True)),
                    "false" => return Ok(Expr::Bool(Cond::False)),
                    _ => {}
                }
                if let Some(i) = scope.iter().rposition(|v| v == a) {
                    return Ok(Expr::Int(Term::Var(i)));
                }
                self.apply_named(a, Vec::new(), pos)?.ok_or_else(|| parse_err(pos, format!("unknown symbol `{a}`")))
            }
            Sexp::List(items, _) => {
                let Some((head, args)) = items.split_first() else {
                    return Err(parse_err(pos, "empty application"));
                };
                let Some(op) = head.as_atom() else {
                    return Err(parse_err(head.pos(), "expected an operator"));
                };
                self.app(op, args, scope, pos)
            }
        }
    }

    fn ints(&self, args: &[Sexp], scope: &[String]) -> Result<Vec<Term>, SygusError> {
        args.iter().map(|a| self.int(a, scope)).collect()
    }

    fn bools(&self, args: &[Sexp], scope: &[String]) -> Result<Vec<Cond>, SygusError> {
        args.iter().map(|a| self.bool(a, scope)).collect()
    }

    fn app(&self, op: &str, args: &[Sexp], scope: &[String], pos: Pos) -> Result<Expr, SygusError> {
        let arity = |n: usize| -> Result<(), SygusError> {
            if args.len() == n {
                Ok(())
            } else {
                Err(parse_err(pos, format!("`{op}` expects {n} arguments, got {}", args.len())))
            }
        };
        let at_least = |n: usize| -> Result<(), SygusError> {
            if args.len() >= n {
                Ok(())
            } else {
                Err(parse_err(pos, format!("`{op}` expects at least {n} arguments")))
            }
        };
        Ok(match op {
            "+" => {
                at_least(1)?;
                Expr::Int(self.ints(args, scope)?.into_iter().reduce(Term::add).unwrap())
            }
            "-" => {
                at_least(1)?;
                if args.len() == 1 {
                    if let Some(n) = literal(&Sexp::List(vec![Sexp::Atom("-".into(), pos), args[0].clone()], pos)) {
                        return Ok(Expr::Int(Term::Const(n)));
                    }
                    return Ok(Expr::Int(Term::mul(-1, self.int(&args[0], scope)?)));
                }
                Expr::Int(self.ints(args, scope)?.into_iter().reduce(Term::sub).unwrap())
            }
            "*" => {
                at_least(2)?;
                let mut acc = self.int(&args[0], scope)?;
                let mut acc_lit = literal(&args[0]);
                for a in &args[1..] {
                    let t = self.int(a, scope)?;
                    acc = if let Some(k) = acc_lit.take() {
                        Term::Mul(k, Box::new(t))
                    } else if let Some(k) = literal(a).or_else(|| t.as_constant()) {
                        Term::Mul(k, Box::new(acc))
                    } else if let Some(k) = acc.as_constant() {
                        Term::Mul(k, Box::new(t))
                    } else {
                        return Err(unsupported(pos, "nonlinear multiplication"));
                    };
                }
                Expr::Int(acc)
            }
            ">=" | "<=" | ">" | "<" => {
                at_least(2)?;
                let ts = self.ints(args, scope)?;
                let mk = match op {
                    ">=" => Cond::geq,
                    "<=" => Cond::leq,
                    ">" => Cond::gt,
                    _ => Cond::lt,
                };
                Expr::Bool(Cond::and_all(ts.windows(2).map(|w| mk(w[0].clone(), w[1].clone()))))
            }
            "=" => {
                at_least(2)?;
                match self.expr(&args[0], scope)? {
                    Expr::Int(_) => {
                        let ts = self.ints(args, scope)?;
                        Expr::Bool(Cond::and_all(ts.windows(2).map(|w| Cond::eq(w[0].clone(), w[1].clone()))))
                    }
                    Expr::Bool(_) => {
                        let cs = self.bools(args, scope)?;
                        Expr::Bool(Cond::and_all(cs.windows(2).map(|w| iff(w[0].clone(), w[1].clone()))))
                    }
                }
            }
            "distinct" => {
                arity(2)?;
                match self.expr(&args[0], scope)? {
                    Expr::Int(a) => Expr::Bool(Cond::not(Cond::eq(a, self.int(&args[1], scope)?))),
                    Expr::Bool(a) => Expr::Bool(Cond::not(iff(a, self.bool(&args[1], scope)?))),
                }
            }
            "and" => Expr::Bool(Cond::and_all(self.bools(args, scope)?)),
            "or" => Expr::Bool(Cond::or_any(self.bools(args, scope)?)),
            "not" => {
                arity(1)?;
                Expr::Bool(Cond::not(self.bool(&args[0], scope)?))
            }
            "=>" => {
                at_least(2)?;
                let mut cs = self.bools(args, scope)?;
                let mut acc = cs.pop().unwrap();
                while let Some(c) = cs.pop() {
                    acc = Cond::implies(c, acc);
                }
                Expr::Bool(acc)
            }
            "xor" => {
                arity(2)?;
                let cs = self.bools(args, scope)?;
                Expr::Bool(Cond::not(iff(cs[0].clone(), cs[1].clone())))
            }
            "ite" => {
                arity(3)?;
                let c = self.bool(&args[0], scope)?;
                match (self.expr(&args[1], scope)?, self.expr(&args[2], scope)?) {
                    (Expr::Int(a), Expr::Int(b)) => Expr::Int(Term::ite(c, a, b)),
                    (Expr::Bool(a), Expr::Bool(b)) => Expr::Bool(Cond::ite(c, a, b)),
                    _ => return Err(parse_err(pos, "ite branches have different sorts")),
                }
            }
            "let" | "forall" | "exists" | "!" => return Err(unsupported(pos, format!("`{op}`"))),
            "div" | "mod" | "abs" => return Err(unsupported(pos, format!("operator `{op}`"))),
            name => {
                let targs = self.ints(args, scope)?;
                return self.apply_named(name, targs, pos)?.ok_or_else(|| parse_err(pos, format!("unknown function `{name}`")));
            }
        })
    }

    fn finish(self) -> Result<SynthProblem, SygusError> {
        let Some(target) = self.target else {
            return Err(parse_err(Pos { line: 1, col: 1 }, "no synth-fun or synth-inv declaration"));
        };
        let mut p = SynthProblem {
            fname: target.name,
            params: target.params,
            ret: target.ret,
            vars: self.vars,
            spec: Cond::and_all(self.constraints),
            track: Track::Clia,
            inv_parts: None,
            grammar: target.grammar,
            warnings: self.warnings,
        };
        if let Some((pos, [inv, pre, trans, post])) = self.inv_constraint {
            if inv != p.fname {
                return Err(parse_err(pos, format!("inv-constraint names `{inv}`, expected `{}`", p.fname)));
            }
            if p.ret != Sort::Bool {
                return Err(parse_err(pos, "invariant must be Bool-valued"));
            }
            let n = p.params.len();
            let get = |name: &str, want: usize| -> Result<Cond, SygusError> {
                let m = self.macros.get(name).ok_or_else(|| parse_err(pos, format!("undefined function `{name}`")))?;
                if m.params.len() != want {
                    return Err(parse_err(pos, format!("`{name}` should take {want} parameters")));
                }
                match &m.body {
                    Expr::Bool(c) => Ok(c.clone()),
                    Expr::Int(_) => Err(parse_err(pos, format!("`{name}` must be Bool-valued"))),
                }
            };
            let parts = InvParts { pre: get(&pre, n)?, trans: get(&trans, 2 * n)?, post: get(&post, n)? };
            let mut vars = p.params.clone();
            vars.extend(p.params.iter().map(|v| format!("{v}!")));
            let f = p.symbol();
            let now = Cond::AppB(f.clone(), (0..n).map(Term::Var).collect());
            let next = Cond::AppB(f, (n..2 * n).map(Term::Var).collect());
            let mut spec = vec![
                Cond::implies(parts.pre.clone(), now.clone()),
                Cond::implies(Cond::and(now.clone(), parts.trans.clone()), next),
                Cond::implies(now, parts.post.clone()),
            ];
            if !matches!(p.spec, Cond::True) {
                p.warnings.push("constraints next to inv-constraint are kept as extra conjuncts".into());
                spec.push(p.spec.clone());
            }
            p.vars = vars;
            p.spec = Cond::and_all(spec);
            p.track = Track::Inv;
            p.inv_parts = Some(parts);
        } else if p.ret == Sort::Bool {
            if let Some(parts) = match_inv_shape(&p) {
                p.track = Track::Inv;
                p.inv_parts = Some(parts);
            }
        }
        Ok(p)
    }
}

fn iff(a: Cond, b: Cond) -> Cond {
    Cond::or(Cond::and(a.clone(), b.clone()), Cond::and(Cond::not(a), Cond::not(b)))
}

/// Distinct variable indices, if every argument is a plain variable.
fn var_args(args: &[Term]) -> Option<Vec<usize>> {
    let mut out = Vec::new();
    for a in args {
        match a {
            Term::Var(i) if !out.contains(i) => out.push(*i),
            _ => return None,
        }
    }
    Some(out)
}

/// Recognizes constraints written out as `pre ⇒ inv(x)`,
/// `inv(x) ∧ trans ⇒ inv(x')` and `inv(x) ⇒ post` without `inv-constraint`.
fn match_inv_shape(p: &SynthProblem) -> Option<InvParts> {
    let f = p.fname.as_str();
    let conj = p.spec.conjuncts();
    if conj.len() != 3 {
        return None;
    }
    let inv_args = |c: &Cond| match c {
        Cond::AppB(g, args) if &**g == f => var_args(args),
        _ => None,
    };
    let no_f = |c: &Cond| c.count_apps(f) == 0;
    let (mut pre, mut trans, mut post) = (None, None, None);
    for c in conj {
        let Cond::Or(lhs, rhs) = c else { return None };
        let Cond::Not(lhs) = &**lhs else { return None };
        if let (Some(xs), true) = (inv_args(rhs), no_f(lhs)) {
            pre.get_or_insert((xs, (**lhs).clone()));
            continue;
        }
        if let (Some(xs), Cond::And(a, b)) = (inv_args(rhs), &**lhs) {
            if let (Some(ys), true) = (inv_args(a), no_f(b)) {
                trans = Some((ys, xs, (**b).clone()));
                continue;
            }
        }
        if let (Some(xs), true) = (inv_args(lhs), no_f(rhs)) {
            post = Some((xs, (**rhs).clone()));
            continue;
        }
        return None;
    }
    let (pre_x, pre) = pre?;
    let (tx, tx2, trans) = trans?;
    let (post_x, post) = post?;
    let n = p.params.len();
    if pre_x.len() != n || tx.len() != n || tx2.len() != n || post_x.len() != n {
        return None;
    }
    let remap = |c: &Cond, order: &[&[usize]]| -> Option<Cond> {
        let mut images = vec![None; p.vars.len()];
        for (k, i) in order.iter().flat_map(|o| o.iter()).enumerate() {
            images[*i] = Some(Term::Var(k));
        }
        let mut used = Vec::new();
        c.collect_vars(&mut used);
        if used.iter().any(|&i| images.get(i).is_none_or(Option::is_none)) {
            return None;
        }
        let images: Vec<Term> = images.into_iter().map(|t| t.unwrap_or(Term::int(0))).collect();
        Some(c.subst_vars(&images))
    };
    Some(InvParts { pre: remap(&pre, &[&pre_x])?, trans: remap(&trans, &[&tx, &tx2])?, post: remap(&post, &[&post_x])? })
}

/// Reads `(define-fun name ((p Int) ...) Sort body)`.
pub fn parse_define_fun(text: &str) -> Result<(String, Vec<String>, Body), SygusError> {
    let s = sexp::parse_one(text)?;
    let items = s.as_list().unwrap_or(&[]);
    let [head, name, params, sort, body] = items else {
        return Err(parse_err(s.pos(), "expected (define-fun name params Sort body)"));
    };
    if !head.is_atom("define-fun") {
        return Err(parse_err(head.pos(), "expected define-fun"));
    }
    let name = atom_of(name, "function name")?;
    let params = parse_params(params)?;
    let sort = parse_sort(sort)?;
    let env = Env::default();
    let e = env.expr(body, &params)?;
    check_sort(&e, sort, body.pos())?;
    Ok((
        name,
        params,
        match e {
            Expr::Int(t) => Body::Int(t),
            Expr::Bool(c) => Body::Bool(c),
        },
    ))
}
