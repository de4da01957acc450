//! Engine dispatch, independent re-verification and the benchmark runner.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::at::{at_solve, build_graph, detect_translational, AtError};
use crate::clia::{Body, Term, Valuation};
use crate::concolic::{concolic_synth, ConcolicError, ConcolicOptions, ConcolicStats};
use crate::smt::{Query, SmtConfig, SmtError, SmtResult, SmtSession, Validity};
use crate::ssi::{normal_form, ssi_synthesize, SsiError, SsiOutcome};
use crate::sygus::{classify, parse, parse_define_fun, print_solution, ProblemClass, Sort, SynthProblem, Track};

pub const DEFAULT_SUITE_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Auto,
    Concolic,
    Ssi,
    At,
}

impl std::str::FromStr for Engine {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(Engine::Auto),
            "concolic" => Ok(Engine::Concolic),
            "ssi" => Ok(Engine::Ssi),
            "at" => Ok(Engine::At),
            other => Err(format!("unknown engine `{other}` (expected auto, concolic, ssi or at)")),
        }
    }
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Engine::Auto => "auto",
            Engine::Concolic => "concolic",
            Engine::Ssi => "ssi",
            Engine::At => "at",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Solved,
    NoSolution,
    Timeout,
    Inconclusive,
    Error,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub engine: Engine,
    /// Route fragment problems to their decision procedures in auto mode.
    pub fragments: bool,
    pub strict_grammar: bool,
    pub timeout: Option<Duration>,
    pub smt: SmtConfig,
    pub jobs: usize,
    pub max_height: usize,
    pub height_iter_cap: Option<usize>,
    pub dump_candidates: bool,
    pub dump_graph: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        let c = ConcolicOptions::default();
        SolveOptions {
            engine: Engine::Auto,
            fragments: true,
            strict_grammar: false,
            timeout: None,
            smt: c.smt,
            jobs: c.jobs,
            max_height: c.max_height,
            height_iter_cap: c.height_iter_cap,
            dump_candidates: false,
            dump_graph: false,
        }
    }
}

/// Result of one solver run on one problem.
#[derive(Clone, Debug, Serialize)]
pub struct SolveOutcome {
    pub status: Status,
    pub engine: Engine,
    pub class: String,
    pub solution: Option<String>,
    #[serde(skip)]
    pub body: Option<Body>,
    /// Counterexample to realizability (SSI) or a reachable bad state (AT).
    pub witness: Option<Vec<String>>,
    pub message: Option<String>,
    pub notes: Vec<String>,
    pub concolic: Option<ConcolicStats>,
    pub candidates: Option<Vec<String>>,
    pub graph_dot: Option<String>,
    pub smt_queries: u64,
}

impl SolveOutcome {
    fn new(class: &ProblemClass) -> Self {
        SolveOutcome {
            status: Status::Error,
            engine: Engine::Auto,
            class: class.tag().to_string(),
            solution: None,
            body: None,
            witness: None,
            message: None,
            notes: Vec::new(),
            concolic: None,
            candidates: None,
            graph_dot: None,
            smt_queries: 0,
        }
    }

    fn finish(mut self, status: Status, message: impl Into<Option<String>>) -> Self {
        self.status = status;
        self.message = message.into();
        self
    }
}

fn witness_text(w: &Valuation, names: &[String]) -> Vec<String> {
    w.iter().zip(names).map(|(v, n)| format!("{n}={v}")).collect()
}

/// Sets a cancel flag once the deadline passes.
struct Deadline {
    flag: Arc<AtomicBool>,
    done: Arc<AtomicBool>,
    end: Option<Instant>,
}

impl Deadline {
    fn start(timeout: Option<Duration>) -> Self {
        let flag = Arc::new(AtomicBool::new(false));
        let done = Arc::new(AtomicBool::new(false));
        let end = timeout.map(|t| Instant::now() + t);
        if let Some(end) = end {
            let (flag, done) = (flag.clone(), done.clone());
            std::thread::spawn(move || {
                while !done.load(Ordering::Relaxed) {
                    if Instant::now() >= end {
                        flag.store(true, Ordering::SeqCst);
                        return;
                    }
                    std::thread::sleep(Duration::from_millis(10));
                }
            });
        }
        Deadline { flag, done, end }
    }

    fn remaining(&self) -> Option<Duration> {
        self.end.map(|e| e.saturating_duration_since(Instant::now()))
    }

    fn expired(&self) -> bool {
        self.flag.load(Ordering::SeqCst)
    }
}

impl Drop for Deadline {
    fn drop(&mut self) {
        self.done.store(true, Ordering::Relaxed);
    }
}

/// A structural mismatch sends the problem to the general engine; anything
/// else is final.
enum Fragment {
    Done(SolveOutcome),
    Fallback(SolveOutcome, String),
}

fn smt_status(e: &SmtError, deadline: &Deadline) -> Status {
    if matches!(e, SmtError::Cancelled) || deadline.expired() {
        Status::Timeout
    } else {
        Status::Error
    }
}

fn run_ssi(p: &SynthProblem, mut out: SolveOutcome, s: &mut SmtSession, deadline: &Deadline, forced: bool) -> Fragment {
    out.engine = Engine::Ssi;
    let r = ssi_synthesize(p, s);
    out.smt_queries += s.query_count();
    match r {
        Ok(SsiOutcome::Solved(body)) => {
            out.solution = Some(print_solution(p, &body));
            out.body = Some(body);
            Fragment::Done(out.finish(Status::Solved, None))
        }
        Ok(SsiOutcome::Unsynthesizable(w)) => {
            out.witness = Some(witness_text(&w, &p.vars));
            Fragment::Done(out.finish(Status::NoSolution, format!("no function exists at {}", out_witness(&w, p))))
        }
        Err(e @ (SsiError::NotSsi | SsiError::NonUnitCoefficient(_) | SsiError::UnsupportedArguments(_) | SsiError::BoolValued))
            if !forced =>
        {
            Fragment::Fallback(out, e.to_string())
        }
        Err(SsiError::Smt(e)) => {
            let st = smt_status(&e, deadline);
            Fragment::Done(out.finish(st, e.to_string()))
        }
        Err(SsiError::Inconclusive(r)) => Fragment::Done(out.finish(Status::Inconclusive, r)),
        Err(e) => Fragment::Done(out.finish(Status::Error, e.to_string())),
    }
}

fn out_witness(w: &Valuation, p: &SynthProblem) -> String {
    witness_text(w, &p.vars).join(", ")
}

fn run_at(p: &SynthProblem, mut out: SolveOutcome, s: &mut SmtSession, deadline: &Deadline, forced: bool) -> Fragment {
    out.engine = Engine::At;
    let ip = match detect_translational(p) {
        Ok(ip) => ip,
        Err(e) if forced => return Fragment::Done(out.finish(Status::Error, e.to_string())),
        Err(e) => return Fragment::Fallback(out, e.to_string()),
    };
    let r = at_solve(p, &ip, s);
    out.smt_queries += s.query_count();
    match r {
        Ok(sol) => {
            let body = Body::Bool(sol.inv);
            out.solution = Some(print_solution(p, &body));
            out.body = Some(body);
            Fragment::Done(out.finish(Status::Solved, None))
        }
        Err(AtError::NoCliaInvariant(w)) => {
            out.witness = Some(witness_text(&w, &ip.names));
            let msg = format!("reachable state {} violates the postcondition", witness_text(&w, &ip.names).join(", "));
            Fragment::Done(out.finish(Status::NoSolution, msg))
        }
        // The weakening failed or the result could not be used; the general
        // engine may still find a CLIA invariant.
        Err(e @ (AtError::ModuloNeeded | AtError::NotInductive)) => Fragment::Fallback(out, e.to_string()),
        Err(e @ (AtError::Cyclic | AtError::SymbolicShift | AtError::Nondeterministic | AtError::NotTranslational(_) | AtError::Clia(_)))
            if !forced =>
        {
            Fragment::Fallback(out, e.to_string())
        }
        Err(AtError::Smt(e)) => {
            let st = smt_status(&e, deadline);
            Fragment::Done(out.finish(st, e.to_string()))
        }
        Err(AtError::Inconclusive(r)) => Fragment::Done(out.finish(Status::Inconclusive, r)),
        Err(e) => Fragment::Done(out.finish(Status::Error, e.to_string())),
    }
}

fn run_concolic(p: &SynthProblem, mut out: SolveOutcome, opts: &SolveOptions, deadline: &Deadline) -> SolveOutcome {
    out.engine = Engine::Concolic;
    let copts = ConcolicOptions {
        jobs: opts.jobs,
        max_height: opts.max_height,
        height_iter_cap: opts.height_iter_cap,
        coeff_bound: ConcolicOptions::default().coeff_bound,
        timeout: deadline.remaining(),
        smt: opts.smt.clone(),
    };
    match concolic_synth(p, &copts) {
        Ok(r) => {
            out.smt_queries += r.stats.smt_queries;
            out.concolic = Some(r.stats);
            out.solution = Some(print_solution(p, &r.body));
            out.body = Some(r.body);
            out.finish(Status::Solved, None)
        }
        Err(ConcolicError::Timeout | ConcolicError::Cancelled) => out.finish(Status::Timeout, "timed out".to_string()),
        Err(e @ (ConcolicError::NoSolutionUpTo(_) | ConcolicError::HeightBudgetExhausted(_) | ConcolicError::Inconclusive(_))) => {
            out.finish(Status::Inconclusive, e.to_string())
        }
        Err(e) => out.finish(Status::Error, e.to_string()),
    }
}

/// Checks the grammar restriction requested by `--strict-grammar`.
pub fn grammar_admits_clia(p: &SynthProblem) -> bool {
    p.grammar.is_none_or(|g| g.has_ite && g.has_comparison)
}

/// Runs the selected engine (falling back to concolic search where a
/// fragment procedure does not apply).
pub fn solve(p: &SynthProblem, opts: &SolveOptions) -> SolveOutcome {
    let class = classify(p);
    let mut out = SolveOutcome::new(&class);
    out.notes.extend(p.warnings.iter().cloned());
    if opts.strict_grammar && !grammar_admits_clia(p) {
        return out.finish(Status::Error, "grammar excludes ite or comparisons".to_string());
    }
    if opts.dump_candidates {
        if let Ok(nf) = normal_form(p) {
            let mut names = p.vars.clone();
            names.push("z".into());
            out.candidates = Some(nf.candidates.iter().map(|t| t.display_with(&|i| names[i].clone()).to_string()).collect());
        }
    }
    let deadline = Deadline::start(opts.timeout);
    if opts.dump_graph {
        if let Ok(ip) = detect_translational(p) {
            if let Ok(mut s) = session(opts, &deadline) {
                if let Ok(g) = build_graph(&ip, &mut s) {
                    out.graph_dot = Some(g.to_dot(&ip));
                }
            }
        }
    }
    let route = match opts.engine {
        Engine::Auto if !opts.fragments => Engine::Concolic,
        Engine::Auto => match class {
            ProblemClass::Ssi { .. } | ProblemClass::SsiCommutative => Engine::Ssi,
            ProblemClass::At => Engine::At,
            ProblemClass::General => Engine::Concolic,
        },
        e => e,
    };
    let forced = opts.engine != Engine::Auto;
    let fragment = match route {
        Engine::Ssi | Engine::At => {
            let mut s = match session(opts, &deadline) {
                Ok(s) => s,
                Err(e) => return out.finish(Status::Error, e.to_string()),
            };
            if route == Engine::Ssi {
                run_ssi(p, out, &mut s, &deadline, forced)
            } else {
                run_at(p, out, &mut s, &deadline, forced)
            }
        }
        _ => Fragment::Fallback(out, String::new()),
    };
    match fragment {
        Fragment::Done(o) => o,
        Fragment::Fallback(mut o, reason) => {
            if !reason.is_empty() {
                log::warn!("falling back to concolic search: {reason}");
                o.notes.push(format!("fell back from {} to concolic: {reason}", o.engine));
            }
            run_concolic(p, o, opts, &deadline)
        }
    }
}

fn session(opts: &SolveOptions, deadline: &Deadline) -> Result<SmtSession, SmtError> {
    Ok(SmtSession::new(opts.smt.clone())?.with_cancel(deadline.flag.clone()))
}

/// Re-checks a solver answer from scratch: a printed solution is parsed
/// back and checked with a fresh solver process; an SSI nonexistence
/// witness is confirmed by showing no output value works there.
pub fn reverify(p: &SynthProblem, out: &SolveOutcome, smt: &SmtConfig) -> Result<bool, String> {
    let mut s = SmtSession::new(smt.clone().with_timeout(Some(Duration::from_secs(60)))).map_err(|e| e.to_string())?;
    match out.status {
        Status::Solved => {
            let text = out.solution.as_deref().ok_or("no solution text")?;
            let (name, params, body) = parse_define_fun(text).map_err(|e| e.to_string())?;
            if name != p.fname || params.len() != p.params.len() {
                return Ok(false);
            }
            match crate::verify::check_solution(p, &body, &mut s).map_err(|e| e.to_string())? {
                Validity::Valid => Ok(true),
                Validity::Invalid(_) => Ok(false),
                Validity::Unknown(r) => Err(format!("verification inconclusive: {r}")),
            }
        }
        Status::NoSolution if out.engine == Engine::Ssi => {
            let w = parse_witness(out.witness.as_deref().unwrap_or_default())?;
            no_output_at(p, &w, &mut s)
        }
        Status::NoSolution => {
            // A reachable bad state must at least violate the postcondition.
            let w = parse_witness(out.witness.as_deref().unwrap_or_default())?;
            let post = &p.inv_parts.as_ref().ok_or("not an invariant problem")?.post;
            Ok(!post.eval(&w).map_err(|e| e.to_string())?)
        }
        _ => Ok(false),
    }
}

fn parse_witness(items: &[String]) -> Result<Valuation, String> {
    items
        .iter()
        .map(|kv| kv.split_once('=').and_then(|(_, v)| v.parse().ok()).ok_or_else(|| format!("bad witness entry `{kv}`")))
        .collect()
}

/// Whether no value `z` for the function's result satisfies the spec at `w`.
fn no_output_at(p: &SynthProblem, w: &Valuation, s: &mut SmtSession) -> Result<bool, String> {
    if p.ret != Sort::Int {
        return Err("nonexistence check needs an Int-valued function".into());
    }
    let spec = match crate::sygus::ssi_invocation(&p.spec, &p.fname) {
        Some(_) => p.spec.clone(),
        None => {
            // Commutative problems: the witness refers to the ordered g-spec.
            let nf = normal_form(p).map_err(|e| e.to_string())?;
            let mut consts: Vec<crate::clia::LinExpr> = w.iter().map(|v| crate::clia::LinExpr::constant(v.clone())).collect();
            consts.push(crate::clia::LinExpr::var(0));
            let q = Query::new(vec!["z".into()]).assert(nf.phi.compose(&consts));
            return unsat(s, &q);
        }
    };
    let f = p.fname.as_str();
    let n = p.vars.len();
    let with_z = spec.map_apps(&mut |g, _| (&**g == f).then_some(Term::Var(n)), &mut |_, _| None);
    let mut images: Vec<Term> = w.iter().map(|v| Term::Const(v.clone())).collect();
    images.push(Term::Var(0));
    let q = Query::new(vec!["z".into()]).assert(with_z.subst_vars(&images));
    unsat(s, &q)
}

fn unsat(s: &mut SmtSession, q: &Query) -> Result<bool, String> {
    match s.check_sat(q).map_err(|e| e.to_string())? {
        SmtResult::Unsat => Ok(true),
        SmtResult::Sat(_) => Ok(false),
        SmtResult::Unknown(r) => Err(r),
    }
}

/// Benchmark category for the report breakdown.
pub fn category(p: &SynthProblem, class: &str) -> &'static str {
    match (p.track, class) {
        (Track::Clia, "SSI" | "SSI_Commutative") => "CLIA(SSI)",
        (Track::Clia, _) => "CLIA(non-SSI)",
        (Track::Inv, "AT") => "INV(AT)",
        (Track::Inv, _) => "INV(non-AT)",
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub path: String,
    pub category: String,
    pub engine: Engine,
    pub status: Status,
    pub ms: u128,
    pub solution: Option<String>,
    pub verified: bool,
    pub unsound: bool,
    pub message: Option<String>,
}

/// Solves and re-verifies one file.
pub fn run_file(path: &Path, opts: &SolveOptions) -> (RunRecord, Option<SolveOutcome>) {
    let start = Instant::now();
    let display = path.display().to_string();
    let p = match std::fs::read_to_string(path).map_err(|e| e.to_string()).and_then(|t| parse(&t).map_err(|e| e.to_string())) {
        Ok(p) => p,
        Err(e) => {
            let rec = RunRecord {
                path: display,
                category: "unparsed".into(),
                engine: opts.engine,
                status: Status::Error,
                ms: start.elapsed().as_millis(),
                solution: None,
                verified: false,
                unsound: false,
                message: Some(e),
            };
            return (rec, None);
        }
    };
    let out = solve(&p, opts);
    let ms = start.elapsed().as_millis();
    let mut message = out.message.clone();
    let verified = match out.status {
        Status::Solved | Status::NoSolution => match reverify(&p, &out, &opts.smt) {
            Ok(v) => v,
            Err(e) => {
                message = Some(format!("re-verification failed: {e}"));
                false
            }
        },
        _ => false,
    };
    let rec = RunRecord {
        path: display,
        category: category(&p, &out.class).into(),
        engine: out.engine,
        status: out.status,
        ms,
        solution: out.solution.clone(),
        verified,
        unsound: out.status == Status::Solved && !verified,
        message,
    };
    (rec, Some(out))
}

/// Every `.sl` file below `dir`, sorted.
pub fn collect_benchmarks(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d)? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e == "sl") {
                out.push(path);
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Runs every benchmark below `dir` on `suite_jobs` threads; records come
/// back in path order.
pub fn run_suite(dir: &Path, opts: &SolveOptions, suite_jobs: usize) -> std::io::Result<Vec<RunRecord>> {
    let files = collect_benchmarks(dir)?;
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<RunRecord>>> = Mutex::new(vec![None; files.len()]);
    std::thread::scope(|scope| {
        for _ in 0..suite_jobs.max(1).min(files.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(path) = files.get(i) else { break };
                let (rec, _) = run_file(path, opts);
                log::info!("{} {} {}ms", rec.path, rec.status, rec.ms);
                slots.lock().unwrap()[i] = Some(rec);
            });
        }
    });
    Ok(slots.into_inner().unwrap().into_iter().map(|r| r.expect("every file ran")).collect())
}

pub fn write_csv(records: &[RunRecord], w: impl std::io::Write) -> csv::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["path", "category", "engine", "status", "ms", "verified"])?;
    for r in records {
        wr.write_record([
            r.path.clone(),
            r.category.clone(),
            r.engine.to_string(),
            r.status.to_string(),
            r.ms.to_string(),
            r.verified.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_json(records: &[RunRecord], w: impl std::io::Write) -> serde_json::Result<()> {
    serde_json::to_writer_pretty(w, records)
}

/// Per-category counts, one line per category.
pub fn summary(records: &[RunRecord]) -> String {
    let mut out = String::from("category        total  solved  no-solution  other  unsound\n");
    for cat in ["CLIA(SSI)", "CLIA(non-SSI)", "INV(AT)", "INV(non-AT)", "unparsed"] {
        let rs: Vec<&RunRecord> = records.iter().filter(|r| r.category == cat).collect();
        if rs.is_empty() {
            continue;
        }
        let count = |s: Status| rs.iter().filter(|r| r.status == s).count();
        let (solved, none) = (count(Status::Solved), count(Status::NoSolution));
        let unsound = rs.iter().filter(|r| r.unsound).count();
        out.push_str(&format!(
            "{cat:<15} {:>5}  {solved:>6}  {none:>11}  {:>5}  {unsound:>7}\n",
            rs.len(),
            rs.len() - solved - none
        ));
    }
    out
}

/// Process exit code for a single solve: 0 answered, 1 timeout or
/// inconclusive, 2 error, 3 unsound output.
pub fn exit_code(rec: &RunRecord) -> i32 {
    if rec.unsound {
        return 3;
    }
    match rec.status {
        Status::Solved | Status::NoSolution => 0,
        Status::Timeout | Status::Inconclusive => 1,
        Status::Error => 2,
    }
}

/// Suite exit code: nonzero only when some answer was unsound.
pub fn suite_exit_code(records: &[RunRecord]) -> i32 {
    if records.iter().any(|r| r.unsound) {
        3
    } else {
        0
    }
}
