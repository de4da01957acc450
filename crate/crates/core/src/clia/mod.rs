//! Conditional linear integer arithmetic: terms, conditions, affine
//! expressions, decision trees and normal forms.

pub mod formula;
pub mod linexpr;
pub mod term;
pub mod tree;

pub use formula::{atomize, negate_geq, to_cnf, to_dnf, to_nnf, Atom, ExtCond, Formula, Lit, DEFAULT_CLAUSE_CAP};
pub use linexpr::LinExpr;
pub use term::{Cond, FunInterp, NoFuns, Symbol, Term, Value};
pub use tree::{Body, DecisionTree, TreeKind, TreeShape, TreeValue};

use num_bigint::BigInt;

/// A point in the variable space.
pub type Valuation = Vec<BigInt>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CliaError {
    #[error("application of `{0}` in a position that must be ground")]
    UngroundedTerm(String),
    #[error("`{0}` used at the wrong sort")]
    SortMismatch(String),
    #[error("variable index {0} has no value")]
    VarOutOfRange(usize),
    #[error("{what} exceeded the size cap of {cap}")]
    SizeLimitExceeded { what: &'static str, cap: usize },
    #[error("modulo assertion cannot be expressed as a plain CLIA condition")]
    ModuloAtom,
    #[error("malformed decision tree: {0}")]
    InvalidTree(String),
}

/// Converts small integers for tests and literals.
pub fn valuation(values: &[i64]) -> Valuation {
    values.iter().map(|&v| BigInt::from(v)).collect()
}
