//! Reachability prover for logically constrained term rewriting systems.
//!
//! Constrained terms are executed symbolically by narrowing, goals are
//! proved with a coinductive calculus whose side conditions go to an
//! external SMT solver, and a bounded ground-semantics oracle cross-checks
//! the symbolic layer.

pub mod constraints;
pub mod frontend;
pub mod lctrs;
pub mod oracle;
pub mod par;
pub mod prover;
pub mod smt;
pub mod signature;
pub mod terms;
