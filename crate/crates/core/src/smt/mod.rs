//! SMT-LIB2 client driving an external solver process over stdin/stdout.
//!
//! Each query is sent as a self-contained script ending in `(reset)`, so a
//! session carries no state between queries apart from the child process.

pub mod print;

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;

use crate::clia::{Cond, ExtCond, FunInterp, Symbol, Term, Valuation, Value};
use crate::sexp::{self, Sexp};

/// Environment variable naming the solver executable.
pub const SOLVER_ENV: &str = "CONCSYNTH_SMT";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SmtError {
    #[error("could not start SMT solver `{program}`: {reason}")]
    Spawn { program: String, reason: String },
    #[error("unexpected reply from SMT solver: {0}")]
    Protocol(String),
    #[error("query cancelled")]
    Cancelled,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SmtResult {
    /// Values for every declared symbol, in declaration order.
    Sat(Valuation),
    Unsat,
    Unknown(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validity {
    Valid,
    /// A valuation of the declared symbols falsifying the formula.
    Invalid(Valuation),
    Unknown(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DefBody {
    Int(Term),
    Bool(Cond),
    Ext(ExtCond),
}

/// An auxiliary `define-fun`; `Var(i)` in the body is the `i`-th parameter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunDef {
    pub name: String,
    pub params: Vec<String>,
    pub body: DefBody,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Assertion {
    Cond(Cond),
    Ext(ExtCond),
}

impl From<Cond> for Assertion {
    fn from(c: Cond) -> Self {
        Assertion::Cond(c)
    }
}

impl From<ExtCond> for Assertion {
    fn from(c: ExtCond) -> Self {
        Assertion::Ext(c)
    }
}

/// A satisfiability query. `Var(i)` in an assertion is `symbols[i]`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Query {
    pub symbols: Vec<String>,
    pub defs: Vec<FunDef>,
    pub assertions: Vec<Assertion>,
}

impl Query {
    pub fn new(symbols: Vec<String>) -> Self {
        Query { symbols, defs: Vec::new(), assertions: Vec::new() }
    }

    /// Symbols `x0 .. x{n-1}`.
    pub fn with_arity(n: usize) -> Self {
        Query::new((0..n).map(|i| format!("x{i}")).collect())
    }

    pub fn define(mut self, def: FunDef) -> Self {
        self.defs.push(def);
        self
    }

    pub fn assert(mut self, a: impl Into<Assertion>) -> Self {
        self.assertions.push(a.into());
        self
    }

    /// The SMT-LIB script up to and including `(check-sat)`.
    pub fn script(&self, logic: &str) -> String {
        let mut s = String::new();
        s.push_str("(set-option :produce-models true)\n");
        s.push_str(&format!("(set-logic {logic})\n"));
        for name in &self.symbols {
            s.push_str(&format!("(declare-const {} Int)\n", print::symbol(name)));
        }
        for d in &self.defs {
            let params: Vec<String> = d.params.iter().map(|p| format!("({} Int)", print::symbol(p))).collect();
            let (sort, body) = match &d.body {
                DefBody::Int(t) => ("Int", print::term(t, &d.params)),
                DefBody::Bool(c) => ("Bool", print::cond(c, &d.params)),
                DefBody::Ext(c) => ("Bool", print::ext_cond(c, &d.params)),
            };
            s.push_str(&format!("(define-fun {} ({}) {sort} {body})\n", print::symbol(&d.name), params.join(" ")));
        }
        for a in &self.assertions {
            let body = match a {
                Assertion::Cond(c) => print::cond(c, &self.symbols),
                Assertion::Ext(c) => print::ext_cond(c, &self.symbols),
            };
            s.push_str(&format!("(assert {body})\n"));
        }
        s.push_str("(check-sat)\n");
        s
    }

    /// Evaluates every assertion at `model`, expanding definitions.
    pub fn holds_at(&self, model: &[BigInt]) -> bool {
        let interp = DefInterp(&self.defs);
        self.assertions.iter().all(|a| match a {
            Assertion::Cond(c) => c.eval_with(model, &interp).unwrap_or(false),
            Assertion::Ext(c) => c.eval_at(model),
        })
    }
}

struct DefInterp<'a>(&'a [FunDef]);

impl FunInterp for DefInterp<'_> {
    fn apply(&self, f: &Symbol, args: &[BigInt]) -> Option<Value> {
        let d = self.0.iter().rev().find(|d| *d.name == **f)?;
        match &d.body {
            DefBody::Int(t) => t.eval_with(args, self).ok().map(Value::Int),
            DefBody::Bool(c) => c.eval_with(args, self).ok().map(Value::Bool),
            DefBody::Ext(c) => Some(Value::Bool(c.eval_at(args))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SmtConfig {
    pub program: String,
    pub args: Vec<String>,
    pub logic: String,
    /// Per-query budget; `None` waits indefinitely.
    pub timeout: Option<Duration>,
    /// Re-evaluate each reported model against the query.
    pub check_models: bool,
}

impl Default for SmtConfig {
    fn default() -> Self {
        SmtConfig::for_program(&resolve_program(None))
    }
}

impl SmtConfig {
    pub fn for_program(program: &str) -> Self {
        SmtConfig {
            program: program.to_string(),
            args: default_args(program),
            logic: "QF_LIA".into(),
            timeout: Some(DEFAULT_TIMEOUT),
            check_models: cfg!(debug_assertions),
        }
    }

    pub fn with_timeout(mut self, t: Option<Duration>) -> Self {
        self.timeout = t;
        self
    }
}

/// Explicit path, then `$CONCSYNTH_SMT`, then `z3` on the `PATH`.
pub fn resolve_program(explicit: Option<&str>) -> String {
    if let Some(p) = explicit {
        return p.to_string();
    }
    match std::env::var(SOLVER_ENV) {
        Ok(p) if !p.trim().is_empty() => p,
        _ => "z3".to_string(),
    }
}

fn default_args(program: &str) -> Vec<String> {
    let base = std::path::Path::new(program).file_stem().and_then(|s| s.to_str()).unwrap_or(program);
    let args: &[&str] = if base.starts_with("cvc") {
        &["--lang=smt2", "--incremental", "--produce-models"]
    } else if base.starts_with("z3") {
        &["-in", "-smt2"]
    } else {
        &[]
    };
    args.iter().map(|s| s.to_string()).collect()
}

struct Proc {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
}

impl Drop for Proc {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// One solver child process, owned by a single worker.
pub struct SmtSession {
    config: SmtConfig,
    proc: Option<Proc>,
    cancel: Arc<AtomicBool>,
    queries: u64,
}

impl SmtSession {
    pub fn new(config: SmtConfig) -> Result<Self, SmtError> {
        let mut s = SmtSession { config, proc: None, cancel: Arc::new(AtomicBool::new(false)), queries: 0 };
        s.ensure_started()?;
        Ok(s)
    }

    /// Shares a cancellation flag; setting it aborts the running query.
    pub fn with_cancel(mut self, flag: Arc<AtomicBool>) -> Self {
        self.cancel = flag;
        self
    }

    pub fn config(&self) -> &SmtConfig {
        &self.config
    }

    pub fn query_count(&self) -> u64 {
        self.queries
    }

    fn ensure_started(&mut self) -> Result<&mut Proc, SmtError> {
        if self.proc.is_none() {
            self.proc = Some(spawn(&self.config)?);
        }
        Ok(self.proc.as_mut().unwrap())
    }

    /// Kills the child; the next query starts a fresh one.
    fn restart(&mut self) {
        self.proc = None;
    }

    pub fn check_sat(&mut self, q: &Query) -> Result<SmtResult, SmtError> {
        self.queries += 1;
        let deadline = self.config.timeout.map(|t| Instant::now() + t);
        let script = q.script(&self.config.logic);
        log::trace!("smt query:\n{script}");
        match self.run(q, &script, deadline) {
            Ok(r) => {
                if let SmtResult::Sat(model) = &r {
                    if self.config.check_models && !q.holds_at(model) {
                        return Err(SmtError::Protocol(format!("model {model:?} does not satisfy the query")));
                    }
                }
                Ok(r)
            }
            Err(Outcome::Timeout) => {
                self.restart();
                Ok(SmtResult::Unknown("timeout".into()))
            }
            Err(Outcome::Cancelled) => {
                self.restart();
                Err(SmtError::Cancelled)
            }
            Err(Outcome::Error(e)) => {
                self.restart();
                Err(e)
            }
        }
    }

    /// Valid iff the negation is unsatisfiable; a model of the negation
    /// is returned as a witness otherwise.
    pub fn check_valid(&mut self, symbols: &[String], defs: &[FunDef], c: &Cond) -> Result<Validity, SmtError> {
        let q = Query { symbols: symbols.to_vec(), defs: defs.to_vec(), assertions: vec![Cond::not(c.clone()).into()] };
        Ok(match self.check_sat(&q)? {
            SmtResult::Unsat => Validity::Valid,
            SmtResult::Sat(m) => Validity::Invalid(m),
            SmtResult::Unknown(r) => Validity::Unknown(r),
        })
    }

    /// Validity of an extended condition (may contain modulo atoms).
    pub fn check_valid_ext(&mut self, symbols: &[String], c: &ExtCond) -> Result<Validity, SmtError> {
        let q = Query::new(symbols.to_vec()).assert(ExtCond::not(c.clone()));
        Ok(match self.check_sat(&q)? {
            SmtResult::Unsat => Validity::Valid,
            SmtResult::Sat(m) => Validity::Invalid(m),
            SmtResult::Unknown(r) => Validity::Unknown(r),
        })
    }

    fn run(&mut self, q: &Query, script: &str, deadline: Option<Instant>) -> Result<SmtResult, Outcome> {
        let cancel = self.cancel.clone();
        let proc = self.ensure_started().map_err(Outcome::Error)?;
        send(proc, script)?;
        let status = read_reply(proc, deadline, &cancel)?;
        let result = match status.trim() {
            "unsat" => SmtResult::Unsat,
            "unknown" => {
                send(proc, "(get-info :reason-unknown)\n")?;
                let reason = read_reply(proc, deadline, &cancel).unwrap_or_default();
                SmtResult::Unknown(reason.trim().to_string())
            }
            "sat" if q.symbols.is_empty() => SmtResult::Sat(Vec::new()),
            "sat" => {
                let names: Vec<String> = q.symbols.iter().map(|s| print::symbol(s)).collect();
                send(proc, &format!("(get-value ({}))\n", names.join(" ")))?;
                let reply = read_reply(proc, deadline, &cancel)?;
                SmtResult::Sat(parse_model(&reply, &q.symbols).map_err(Outcome::Error)?)
            }
            other => return Err(Outcome::Error(SmtError::Protocol(other.to_string()))),
        };
        send(proc, "(reset)\n")?;
        Ok(result)
    }
}

enum Outcome {
    Timeout,
    Cancelled,
    Error(SmtError),
}

fn spawn(config: &SmtConfig) -> Result<Proc, SmtError> {
    let mut child = Command::new(&config.program)
        .args(&config.args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| SmtError::Spawn { program: config.program.clone(), reason: e.to_string() })?;
    let stdin = child.stdin.take().expect("piped stdin");
    let stdout = child.stdout.take().expect("piped stdout");
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        for line in BufReader::new(stdout).lines() {
            let Ok(line) = line else { break };
            if tx.send(line).is_err() {
                break;
            }
        }
    });
    Ok(Proc { child, stdin, lines: rx })
}

fn send(proc: &mut Proc, text: &str) -> Result<(), Outcome> {
    proc.stdin
        .write_all(text.as_bytes())
        .and_then(|_| proc.stdin.flush())
        .map_err(|e| Outcome::Error(SmtError::Protocol(format!("solver closed its input: {e}"))))
}

const POLL: Duration = Duration::from_millis(20);

/// Collects lines until they form one complete reply.
fn read_reply(proc: &mut Proc, deadline: Option<Instant>, cancel: &AtomicBool) -> Result<String, Outcome> {
    let mut buf = String::new();
    loop {
        if cancel.load(Ordering::Relaxed) {
            return Err(Outcome::Cancelled);
        }
        let wait = match deadline {
            Some(d) => {
                let now = Instant::now();
                if now >= d {
                    return Err(Outcome::Timeout);
                }
                POLL.min(d - now)
            }
            None => POLL,
        };
        match proc.lines.recv_timeout(wait) {
            Ok(line) => {
                buf.push_str(&line);
                buf.push('\n');
                if sexp::is_complete(&buf) {
                    if buf.trim_start().starts_with("(error") {
                        return Err(Outcome::Error(SmtError::Protocol(buf.trim().to_string())));
                    }
                    return Ok(buf);
                }
            }
            Err(RecvTimeoutError::Timeout) => {}
            Err(RecvTimeoutError::Disconnected) => {
                let raw = if buf.is_empty() { "solver exited".to_string() } else { buf };
                return Err(Outcome::Error(SmtError::Protocol(raw)));
            }
        }
    }
}

fn parse_model(reply: &str, symbols: &[String]) -> Result<Valuation, SmtError> {
    let bad = || SmtError::Protocol(reply.trim().to_string());
    let parsed = sexp::parse_one(reply).map_err(|_| bad())?;
    let pairs = parsed.as_list().ok_or_else(bad)?;
    if pairs.len() != symbols.len() {
        return Err(bad());
    }
    pairs
        .iter()
        .map(|p| match p.as_list() {
            Some([_, v]) => parse_int(v).ok_or_else(bad),
            _ => Err(bad()),
        })
        .collect()
}

fn parse_int(v: &Sexp) -> Option<BigInt> {
    match v {
        Sexp::Atom(s, _) => s.parse().ok(),
        Sexp::List(items, _) => match items.as_slice() {
            [op, inner] if op.is_atom("-") => parse_int(inner).map(|n| -n),
            _ => None,
        },
        Sexp::Str(..) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_replies_parse() {
        let syms = vec!["x".to_string(), "y".to_string()];
        let m = parse_model("((x 3)\n (y (- 12)))\n", &syms).unwrap();
        assert_eq!(m, vec![BigInt::from(3), BigInt::from(-12)]);
        assert!(parse_model("((x 3))", &syms).is_err());
    }

    #[test]
    fn default_flags_follow_the_executable_name() {
        assert_eq!(default_args("/usr/bin/z3"), vec!["-in", "-smt2"]);
        assert_eq!(default_args("cvc5")[0], "--lang=smt2");
        assert!(default_args("mysolver").is_empty());
    }

    #[test]
    fn script_has_declarations_and_check() {
        let q = Query::new(vec!["x".into()]).assert(Cond::geq(Term::var(0), Term::int(1)));
        let s = q.script("QF_LIA");
        assert!(s.contains("(declare-const x Int)"));
        assert!(s.contains("(assert (>= x 1))"));
        assert!(s.ends_with("(check-sat)\n"));
    }
}
