//! Height-enumerating CEGIS over decision trees.
//!
//! At a fixed height the unknown tree is a vector of integer coefficients.
//! Because the specification is only ever instantiated at concrete
//! counterexamples, every application of the function is to constants and
//! the synthesis query stays within linear arithmetic.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::clia::{Body, Cond, DecisionTree, LinExpr, Term, TreeKind, TreeValue, Valuation, Value};
use crate::clia::tree::node_count;
use crate::smt::{Query, SmtConfig, SmtError, SmtResult, SmtSession, Validity};
use crate::sygus::{Sort, SynthProblem};

pub const DEFAULT_MAX_HEIGHT: usize = 12;
pub const DEFAULT_HEIGHT_ITER_CAP: usize = 10_000;
pub const DEFAULT_COEFF_BOUND: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConcolicError {
    #[error("unsupported specification: {0}")]
    Unsupported(String),
    #[error("SMT solver returned unknown: {0}")]
    Inconclusive(String),
    #[error(transparent)]
    Smt(SmtError),
    #[error("iteration budget exhausted at heights {0:?} without a solution")]
    HeightBudgetExhausted(Vec<usize>),
    #[error("no solution of height at most {0}")]
    NoSolutionUpTo(usize),
    #[error("timed out")]
    Timeout,
    #[error("cancelled")]
    Cancelled,
}

impl From<SmtError> for ConcolicError {
    fn from(e: SmtError) -> Self {
        match e {
            SmtError::Cancelled => ConcolicError::Cancelled,
            other => ConcolicError::Smt(other),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConcolicOptions {
    pub jobs: usize,
    pub max_height: usize,
    /// Verify/synthesize rounds per height; `None` removes the cap.
    pub height_iter_cap: Option<usize>,
    /// Coefficients are first searched in `[-b, b]`; the unbounded query
    /// runs only when that fails, so height-level verdicts stay exact.
    pub coeff_bound: Option<u32>,
    pub timeout: Option<Duration>,
    pub smt: SmtConfig,
}

impl Default for ConcolicOptions {
    fn default() -> Self {
        ConcolicOptions {
            jobs: 1,
            max_height: DEFAULT_MAX_HEIGHT,
            height_iter_cap: Some(DEFAULT_HEIGHT_ITER_CAP),
            coeff_bound: Some(DEFAULT_COEFF_BOUND),
            timeout: None,
            smt: SmtConfig::default(),
        }
    }
}

/// Counterexamples gathered so far, each with the candidate it refuted.
#[derive(Clone, Debug, Default)]
pub struct CexStore {
    examples: Vec<Valuation>,
    refuted: Vec<DecisionTree>,
}

impl CexStore {
    pub fn new() -> Self {
        CexStore::default()
    }

    /// Adds `e` unless already present; returns whether it was new.
    pub fn insert(&mut self, e: Valuation, refuted: DecisionTree) -> bool {
        if self.examples.contains(&e) {
            return false;
        }
        self.examples.push(e);
        self.refuted.push(refuted);
        true
    }

    pub fn examples(&self) -> &[Valuation] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Pairs of counterexample and the candidate it refuted.
    pub fn audit(&self) -> impl Iterator<Item = (&Valuation, &DecisionTree)> {
        self.examples.iter().zip(&self.refuted)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HeightOutcome {
    Found(DecisionTree),
    NoSolutionAtHeight,
    BudgetExhausted,
}

#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct ConcolicStats {
    /// `(height, outcome)` for every height that finished.
    pub heights: Vec<(usize, String)>,
    pub iterations: usize,
    pub examples: usize,
    pub smt_queries: u64,
}

#[derive(Clone, Debug)]
pub struct ConcolicResult {
    pub tree: DecisionTree,
    pub body: Body,
    pub stats: ConcolicStats,
}

/// Index of `c_i_j` (or `d_i` for `j == arity`) among the unknowns.
pub fn unknown_index(node: usize, j: usize, arity: usize) -> usize {
    node * (arity + 1) + j
}

pub fn unknown_names(height: usize, arity: usize) -> Vec<String> {
    let mut names = Vec::with_capacity(node_count(height) * (arity + 1));
    for i in 0..node_count(height) {
        for j in 0..arity {
            names.push(format!("c_{i}_{j}"));
        }
        names.push(format!("d_{i}"));
    }
    names
}

fn node_expr(node: usize, e: &[BigInt], arity: usize) -> Term {
    let mut acc = Term::Var(unknown_index(node, arity, arity));
    for (j, v) in e.iter().enumerate() {
        if v.is_zero() {
            continue;
        }
        let c = Term::Var(unknown_index(node, j, arity));
        let scaled = if *v == BigInt::from(1) { c } else { Term::Mul(v.clone(), Box::new(c)) };
        acc = Term::add(scaled, acc);
    }
    acc
}

/// The height-`h` tree applied to the constant arguments `e`, as a term
/// (or condition) over the unknown coefficients.
pub fn encode_app(height: usize, e: &[BigInt], kind: TreeKind) -> Body {
    let arity = e.len();
    fn go(i: usize, nodes: usize, e: &[BigInt], arity: usize, kind: TreeKind) -> Body {
        let expr = node_expr(i, e, arity);
        if 2 * i + 1 >= nodes {
            return match kind {
                TreeKind::IntValued => Body::Int(expr),
                TreeKind::BoolValued => Body::Bool(Cond::geq(expr, Term::int(0))),
            };
        }
        let guard = Cond::geq(expr, Term::int(0));
        match (go(2 * i + 1, nodes, e, arity, kind), go(2 * i + 2, nodes, e, arity, kind)) {
            (Body::Int(a), Body::Int(b)) => Body::Int(Term::ite(guard, a, b)),
            (Body::Bool(a), Body::Bool(b)) => Body::Bool(Cond::ite(guard, a, b)),
            _ => unreachable!("both subtrees share the kind"),
        }
    }
    go(0, node_count(height), e, arity, kind)
}

fn tree_kind(p: &SynthProblem) -> TreeKind {
    match p.ret {
        Sort::Int => TreeKind::IntValued,
        Sort::Bool => TreeKind::BoolValued,
    }
}

/// Rejects specifications where the function is applied to a term that
/// itself contains the function.
pub fn check_supported(p: &SynthProblem) -> Result<(), ConcolicError> {
    let mut nested = false;
    p.spec.visit_apps(&mut |g, args| {
        if **g == p.fname {
            for a in args {
                if a.count_apps(&p.fname) > 0 {
                    nested = true;
                }
            }
        }
    });
    if nested {
        return Err(ConcolicError::Unsupported("nested applications of the synthesized function".into()));
    }
    let mut foreign = None;
    p.spec.visit_apps(&mut |g, _| {
        if **g != p.fname {
            foreign = Some(g.to_string());
        }
    });
    match foreign {
        Some(g) => Err(ConcolicError::Unsupported(format!("unknown function `{g}`"))),
        None => Ok(()),
    }
}

trait CountApps {
    fn count_apps(&self, f: &str) -> usize;
}

impl CountApps for Term {
    fn count_apps(&self, f: &str) -> usize {
        let mut n = 0;
        self.visit_apps(&mut |g, _| {
            if &**g == f {
                n += 1
            }
        });
        n
    }
}

/// `⋀_{e ∈ E} φ(f; e)` with `f` replaced by the height-`h` encoding.
pub fn synthesis_query(p: &SynthProblem, height: usize, examples: &[Valuation]) -> Query {
    let arity = p.arity();
    let kind = tree_kind(p);
    let mut symbols = unknown_names(height, arity);
    let n_unknowns = symbols.len();
    let mut shared: HashMap<Vec<BigInt>, usize> = HashMap::new();
    let mut defs_eqs: Vec<Cond> = Vec::new();
    let mut assertions = Vec::new();
    for e in examples {
        let consts: Vec<Term> = e.iter().map(|v| Term::Const(v.clone())).collect();
        let ground = p.spec.subst_vars(&consts);
        let f = p.fname.as_str();
        let arg_values = |args: &[Term]| -> Vec<BigInt> {
            args.iter().map(|a| a.as_constant().expect("arguments are ground after substitution")).collect()
        };
        let inst = ground.map_apps(
            &mut |g, args| {
                if &**g != f {
                    return None;
                }
                let vals = arg_values(args);
                // One Int symbol per distinct argument tuple keeps the query small.
                let idx = *shared.entry(vals.clone()).or_insert_with(|| {
                    let idx = symbols.len();
                    symbols.push(format!("v_{}", idx - n_unknowns));
                    let Body::Int(enc) = encode_app(height, &vals, kind) else { unreachable!() };
                    defs_eqs.push(Cond::eq(Term::Var(idx), enc));
                    idx
                });
                Some(Term::Var(idx))
            },
            &mut |g, args| {
                if &**g != f {
                    return None;
                }
                match encode_app(height, &arg_values(args), kind) {
                    Body::Bool(c) => Some(c),
                    Body::Int(_) => None,
                }
            },
        );
        assertions.push(inst.simplify());
    }
    let mut q = Query::new(symbols);
    for c in defs_eqs.into_iter().chain(assertions) {
        q = q.assert(c);
    }
    q
}

fn tree_from_model(p: &SynthProblem, height: usize, model: &[BigInt]) -> DecisionTree {
    let arity = p.arity();
    let nodes = (0..node_count(height))
        .map(|i| {
            let coeffs = (0..arity).map(|j| model[unknown_index(i, j, arity)].clone()).collect();
            LinExpr::new(coeffs, model[unknown_index(i, arity, arity)].clone())
        })
        .collect();
    DecisionTree::new(height, nodes, tree_kind(p)).expect("node count matches height")
}

/// Whether the spec fails at `e` when the function is the given tree.
pub fn refutes(p: &SynthProblem, tree: &DecisionTree, e: &[BigInt]) -> bool {
    let interp = |g: &crate::clia::Symbol, args: &[BigInt]| -> Option<Value> {
        (**g == *p.fname).then(|| match tree.eval(args) {
            TreeValue::Int(v) => Value::Int(v),
            TreeValue::Bool(b) => Value::Bool(b),
        })
    };
    matches!(p.spec.eval_with(e, &interp), Ok(false))
}

/// Restricts every variable coefficient (not the offsets) to `[-b, b]`.
fn bound_coefficients(mut q: Query, height: usize, arity: usize, b: u32) -> Query {
    let b = i64::from(b);
    for i in 0..node_count(height) {
        for j in 0..arity {
            let c = Term::Var(unknown_index(i, j, arity));
            q = q.assert(Cond::and(Cond::geq(c.clone(), Term::int(-b)), Cond::leq(c, Term::int(b))));
        }
    }
    q
}

/// A tree of the given height consistent with every stored example.
fn next_candidate(
    p: &SynthProblem,
    height: usize,
    store: &CexStore,
    s: &mut SmtSession,
    coeff_bound: Option<u32>,
) -> Result<Option<DecisionTree>, ConcolicError> {
    let q = synthesis_query(p, height, store.examples());
    if let Some(b) = coeff_bound {
        if let SmtResult::Sat(model) = s.check_sat(&bound_coefficients(q.clone(), height, p.arity(), b))? {
            return Ok(Some(tree_from_model(p, height, &model)));
        }
    }
    match s.check_sat(&q)? {
        SmtResult::Unsat => Ok(None),
        SmtResult::Unknown(r) => Err(ConcolicError::Inconclusive(r)),
        SmtResult::Sat(model) => Ok(Some(tree_from_model(p, height, &model))),
    }
}

/// The CEGIS loop at one height.
pub fn fixed_height_synth(
    p: &SynthProblem,
    height: usize,
    store: &mut CexStore,
    s: &mut SmtSession,
    iter_cap: Option<usize>,
    coeff_bound: Option<u32>,
    cancel: &AtomicBool,
    stats: &mut ConcolicStats,
) -> Result<HeightOutcome, ConcolicError> {
    // With examples carried over from lower heights, start from a tree that
    // already fits them rather than from the zero tree.
    let mut candidate = DecisionTree::zero(height, tree_kind(p));
    if !store.is_empty() {
        match next_candidate(p, height, store, s, coeff_bound)? {
            Some(t) => candidate = t,
            None => return Ok(HeightOutcome::NoSolutionAtHeight),
        }
    }
    let mut rounds = 0usize;
    loop {
        if cancel.load(Ordering::Relaxed) {
            return Err(ConcolicError::Cancelled);
        }
        if iter_cap.is_some_and(|cap| rounds >= cap) {
            return Ok(HeightOutcome::BudgetExhausted);
        }
        rounds += 1;
        stats.iterations += 1;
        match crate::verify::check_solution(p, &candidate.to_body(), s)? {
            Validity::Valid => return Ok(HeightOutcome::Found(candidate)),
            Validity::Unknown(r) => return Err(ConcolicError::Inconclusive(r)),
            Validity::Invalid(e) => {
                debug_assert!(refutes(p, &candidate, &e), "counterexample {e:?} does not refute the candidate");
                let new = store.insert(e.clone(), candidate.clone());
                // Every candidate fits all stored examples, so a stored one
                // cannot come back.
                debug_assert!(new, "repeated counterexample {e:?}");
            }
        }
        match next_candidate(p, height, store, s, coeff_bound)? {
            Some(t) => candidate = t,
            None => return Ok(HeightOutcome::NoSolutionAtHeight),
        }
    }
}

/// Hands out heights to workers and keeps the best solution.
pub struct HeightScheduler {
    next: AtomicUsize,
    max_height: usize,
    best: Mutex<Option<DecisionTree>>,
    /// Lowest height whose search ended in an error.
    failed: AtomicUsize,
    workers: Vec<(Arc<AtomicBool>, AtomicUsize)>,
}

impl HeightScheduler {
    pub fn new(max_height: usize, workers: usize) -> Self {
        HeightScheduler {
            next: AtomicUsize::new(1),
            max_height,
            best: Mutex::new(None),
            failed: AtomicUsize::new(usize::MAX),
            workers: (0..workers).map(|_| (Arc::new(AtomicBool::new(false)), AtomicUsize::new(0))).collect(),
        }
    }

    pub fn cancel_flag(&self, worker: usize) -> Arc<AtomicBool> {
        self.workers[worker].0.clone()
    }

    /// Next unexplored height, or `None` once a solution is known, a
    /// smaller height has failed, or the maximum height is reached.
    pub fn next_height(&self, worker: usize) -> Option<usize> {
        if self.best.lock().unwrap().is_some() {
            return None;
        }
        let h = self.next.fetch_add(1, Ordering::SeqCst);
        if h > self.max_height || h > self.failed.load(Ordering::SeqCst) {
            return None;
        }
        self.workers[worker].1.store(h, Ordering::SeqCst);
        Some(h)
    }

    /// Records a solution; workers on larger heights are cancelled, while
    /// smaller heights run on since they could still win.
    pub fn offer(&self, tree: DecisionTree) {
        let h = tree.height();
        let mut best = self.best.lock().unwrap();
        if best.as_ref().is_none_or(|b| h < b.height()) {
            *best = Some(tree);
        }
        self.cancel_above(h);
    }

    /// Records that height `h` could not be decided. Nothing above it can
    /// be reported as minimal any more, so those workers stop.
    pub fn fail(&self, h: usize) {
        self.failed.fetch_min(h, Ordering::SeqCst);
        self.cancel_above(h);
    }

    pub fn failed_height(&self) -> Option<usize> {
        Some(self.failed.load(Ordering::SeqCst)).filter(|&h| h != usize::MAX)
    }

    /// Whether a worker at height `h` was stopped by a result below it.
    fn superseded(&self, h: usize) -> bool {
        self.best().is_some_and(|b| b.height() < h) || self.failed_height().is_some_and(|f| f < h)
    }

    fn cancel_above(&self, h: usize) {
        for (flag, height) in &self.workers {
            if height.load(Ordering::SeqCst) > h {
                flag.store(true, Ordering::SeqCst);
            }
        }
    }

    pub fn cancel_all(&self) {
        for (flag, _) in &self.workers {
            flag.store(true, Ordering::SeqCst);
        }
    }

    pub fn best(&self) -> Option<DecisionTree> {
        self.best.lock().unwrap().clone()
    }
}

struct Watchdog {
    done: Arc<AtomicBool>,
    fired: Arc<AtomicBool>,
}

impl Watchdog {
    fn start(timeout: Option<Duration>, on_fire: impl Fn() + Send + 'static) -> Self {
        let done = Arc::new(AtomicBool::new(false));
        let fired = Arc::new(AtomicBool::new(false));
        if let Some(t) = timeout {
            let (done, fired) = (done.clone(), fired.clone());
            let deadline = Instant::now() + t;
            std::thread::spawn(move || {
                while !done.load(Ordering::Relaxed) {
                    if Instant::now() >= deadline {
                        fired.store(true, Ordering::SeqCst);
                        on_fire();
                        return;
                    }
                    std::thread::sleep(Duration::from_millis(10));
                }
            });
        }
        Watchdog { done, fired }
    }

    fn fired(&self) -> bool {
        self.fired.load(Ordering::SeqCst)
    }
}

impl Drop for Watchdog {
    fn drop(&mut self) {
        self.done.store(true, Ordering::Relaxed);
    }
}

/// Explores heights from 1 upwards and returns the smallest-height solution.
pub fn concolic_synth(p: &SynthProblem, opts: &ConcolicOptions) -> Result<ConcolicResult, ConcolicError> {
    check_supported(p)?;
    let jobs = opts.jobs.max(1);
    let sched = Arc::new(HeightScheduler::new(opts.max_height, jobs));
    let watchdog = {
        let sched = sched.clone();
        Watchdog::start(opts.timeout, move || sched.cancel_all())
    };
    let (stats, error) = if jobs == 1 { worker(p, opts, &sched, 0) } else { run_parallel(p, opts, &sched, jobs) };
    let timed_out = watchdog.fired();
    drop(watchdog);
    let best = sched.best().filter(|b| error.as_ref().is_none_or(|(h, _)| b.height() < *h));
    match (best, error) {
        (Some(tree), _) => Ok(ConcolicResult { body: tree.to_body(), tree, stats }),
        (None, _) if timed_out => Err(ConcolicError::Timeout),
        (None, Some((_, e))) => Err(e),
        (None, None) => {
            let exhausted: Vec<usize> =
                stats.heights.iter().filter(|(_, o)| o == "budget-exhausted").map(|(h, _)| *h).collect();
            if exhausted.is_empty() {
                Err(ConcolicError::NoSolutionUpTo(opts.max_height))
            } else {
                Err(ConcolicError::HeightBudgetExhausted(exhausted))
            }
        }
    }
}

fn outcome_label(o: &HeightOutcome) -> &'static str {
    match o {
        HeightOutcome::Found(_) => "found",
        HeightOutcome::NoSolutionAtHeight => "no-solution",
        HeightOutcome::BudgetExhausted => "budget-exhausted",
    }
}

/// One worker: heights from the scheduler, one session, one example store
/// kept across the heights this worker explores. Returns the height that
/// failed, if any, with its error.
fn worker(p: &SynthProblem, opts: &ConcolicOptions, sched: &HeightScheduler, id: usize) -> (ConcolicStats, Option<(usize, ConcolicError)>) {
    let cancel = sched.cancel_flag(id);
    let mut stats = ConcolicStats::default();
    let mut session = match SmtSession::new(opts.smt.clone()) {
        Ok(s) => s.with_cancel(cancel.clone()),
        Err(e) => {
            sched.fail(1);
            return (stats, Some((1, e.into())));
        }
    };
    let mut store = CexStore::new();
    while let Some(h) = sched.next_height(id) {
        log::debug!("worker {id}: height {h}");
        let r = fixed_height_synth(p, h, &mut store, &mut session, opts.height_iter_cap, opts.coeff_bound, &cancel, &mut stats);
        stats.examples = store.len();
        stats.smt_queries = session.query_count();
        match r {
            Ok(o) => {
                stats.heights.push((h, outcome_label(&o).to_string()));
                if let HeightOutcome::Found(tree) = o {
                    sched.offer(tree);
                }
            }
            Err(ConcolicError::Cancelled) if sched.superseded(h) => break,
            Err(e) => {
                log::debug!("worker {id}: height {h} failed: {e}");
                sched.fail(h);
                return (stats, Some((h, e)));
            }
        }
    }
    (stats, None)
}

fn run_parallel(
    p: &SynthProblem,
    opts: &ConcolicOptions,
    sched: &Arc<HeightScheduler>,
    jobs: usize,
) -> (ConcolicStats, Option<(usize, ConcolicError)>) {
    let results: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|id| {
                let sched = sched.clone();
                scope.spawn(move || worker(p, opts, &sched, id))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut total = ConcolicStats::default();
    let mut lowest: Option<(usize, ConcolicError)> = None;
    for (s, err) in results {
        total.heights.extend(s.heights);
        total.iterations += s.iterations;
        total.examples += s.examples;
        total.smt_queries += s.smt_queries;
        if let Some((h, e)) = err {
            if lowest.as_ref().is_none_or(|(l, _)| h < *l) {
                lowest = Some((h, e));
            }
        }
    }
    total.heights.sort();
    (total, lowest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn encoding_shapes() {
        let Body::Int(t) = encode_app(1, &b(&[4]), TreeKind::IntValued) else { panic!() };
        assert_eq!(t, Term::add(Term::mul(4, Term::Var(0)), Term::Var(1)));
        let Body::Int(t) = encode_app(2, &b(&[0, 0]), TreeKind::IntValued) else { panic!() };
        assert_eq!(t, Term::ite(Cond::geq(Term::Var(2), Term::int(0)), Term::Var(5), Term::Var(8)));
        assert_eq!(unknown_names(2, 2)[3..6], ["c_1_0", "c_1_1", "d_1"]);
    }

    #[test]
    fn encoding_evaluates_like_the_tree() {
        // Assign the unknowns of a height-2, arity-2 tree and compare.
        let tree = DecisionTree::new(
            2,
            vec![LinExpr::from_i64s(&[1, -1], 0), LinExpr::from_i64s(&[1, 0], 0), LinExpr::from_i64s(&[0, 1], 0)],
            TreeKind::IntValued,
        )
        .unwrap();
        let mut unknowns = Vec::new();
        for n in tree.nodes() {
            unknowns.extend((0..2).map(|j| n.coeff(j)));
            unknowns.push(n.offset().clone());
        }
        for e in [[1, -2], [3, 3], [-4, 7]] {
            let e = b(&e);
            let Body::Int(t) = encode_app(2, &e, TreeKind::IntValued) else { panic!() };
            assert_eq!(TreeValue::Int(t.eval(&unknowns).unwrap()), tree.eval(&e));
        }
    }

    #[test]
    fn scheduler_stops_issuing_after_success() {
        let s = HeightScheduler::new(5, 2);
        assert_eq!(s.next_height(0), Some(1));
        assert_eq!(s.next_height(1), Some(2));
        s.offer(DecisionTree::zero(2, TreeKind::IntValued));
        assert!(!s.cancel_flag(0).load(Ordering::SeqCst));
        assert_eq!(s.next_height(0), None);
        s.offer(DecisionTree::zero(1, TreeKind::IntValued));
        assert_eq!(s.best().unwrap().height(), 1);
    }

    #[test]
    fn failure_stops_only_larger_heights() {
        let s = HeightScheduler::new(6, 3);
        assert_eq!(s.next_height(0), Some(1));
        assert_eq!(s.next_height(1), Some(2));
        assert_eq!(s.next_height(2), Some(3));
        s.fail(2);
        assert!(!s.cancel_flag(0).load(Ordering::SeqCst));
        assert!(s.cancel_flag(2).load(Ordering::SeqCst));
        assert_eq!(s.next_height(1), None);
        assert_eq!(s.failed_height(), Some(2));
        assert!(s.superseded(3) && !s.superseded(1));
    }
}
