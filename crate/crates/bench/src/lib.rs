//! Fixtures shared by the benchmarks.

use std::path::PathBuf;

use concsynth::clia::{ExtCond, Formula, LinExpr};
use concsynth::sygus::{parse, SynthProblem};

/// Loads a problem from the bundled corpus.
pub fn corpus(rel: &str) -> SynthProblem {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(rel);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// `⋀_i (x_n ≥ x_i) ∧ ⋁_i (x_n = x_i)` over `x_0 … x_{n-1}`: "x_n is the maximum".
pub fn max_formula(n: usize) -> ExtCond {
    let z = LinExpr::var(n);
    let above = (0..n).map(|i| ExtCond::geq(&z - &LinExpr::var(i)));
    let equal = (0..n).map(|i| {
        Formula::and2(ExtCond::geq(&z - &LinExpr::var(i)), ExtCond::geq(&LinExpr::var(i) - &z))
    });
    Formula::and2(Formula::and(above.collect::<Vec<_>>()), Formula::or(equal.collect::<Vec<_>>()))
}
