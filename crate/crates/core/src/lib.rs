//! Synthesis of conditional linear integer arithmetic functions and loop
//! invariants.
//!
//! Three engines share one CLIA representation: a height-enumerating CEGIS
//! search over decision trees ([`concolic`]), a terminating procedure for
//! strong-single-invocation specifications ([`ssi`]) and a terminating
//! procedure for acyclic translational invariant problems ([`at`]).
//! [`harness`] picks an engine per problem and re-verifies every answer.

pub mod at;
pub mod clia;
pub mod concolic;
pub mod harness;
pub mod qe;
pub mod sexp;
pub mod smt;
pub mod ssi;
pub mod sygus;
pub mod verify;

pub use clia::{Cond, DecisionTree, LinExpr, Term, Valuation};
