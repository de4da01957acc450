//! SyGuS input: parsing, solution printing and problem classification.

mod classify;
mod parser;
mod printer;

pub use classify::{classify, split_commutative, ssi_invocation, Commutative, ProblemClass};
pub use parser::{parse, parse_define_fun};
pub use printer::{body_sexp, cond_sexp, print_solution, term_sexp};

use crate::clia::{Cond, Symbol, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Sort {
    Int,
    Bool,
}

impl std::fmt::Display for Sort {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sort::Int => "Int",
            Sort::Bool => "Bool",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Track {
    Clia,
    Inv,
}

/// The three components of an invariant problem over `n` state variables.
/// `pre` and `post` range over `Var(0..n)`; `trans` relates `Var(0..n)`
/// to the primed copies `Var(n..2n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvParts {
    pub pre: Cond,
    pub trans: Cond,
    pub post: Cond,
}

/// Which grammar features a `synth-fun` declaration admits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GrammarSummary {
    pub has_ite: bool,
    pub has_comparison: bool,
}

/// `∃f ∀vars. spec`, with `Var(i)` in `spec` standing for `vars[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthProblem {
    pub fname: String,
    pub params: Vec<String>,
    pub ret: Sort,
    pub vars: Vec<String>,
    pub spec: Cond,
    pub track: Track,
    pub inv_parts: Option<InvParts>,
    pub grammar: Option<GrammarSummary>,
    pub warnings: Vec<String>,
}

impl SynthProblem {
    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn symbol(&self) -> Symbol {
        Symbol::from(self.fname.as_str())
    }

    /// `f` applied to the given arguments, at the function's sort.
    pub fn apply(&self, args: Vec<Term>) -> crate::clia::Body {
        match self.ret {
            Sort::Int => crate::clia::Body::Int(Term::App(self.symbol(), args)),
            Sort::Bool => crate::clia::Body::Bool(Cond::AppB(self.symbol(), args)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SygusError {
    #[error("{line}:{col}: {message}")]
    Parse { line: usize, col: usize, message: String },
    #[error("unsupported logic `{0}` (only LIA is accepted)")]
    UnsupportedLogic(String),
    #[error("{line}:{col}: unsupported construct: {message}")]
    Unsupported { line: usize, col: usize, message: String },
}

impl From<crate::sexp::SexpError> for SygusError {
    fn from(e: crate::sexp::SexpError) -> Self {
        SygusError::Parse { line: e.line, col: e.col, message: e.message }
    }
}
