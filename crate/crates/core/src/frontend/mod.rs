//! Spec files: parsing, name resolution, printing, and the command line.

pub mod ast;
pub mod cli;
pub mod lexer;
pub mod parser;
pub mod printer;
mod resolve;

use thiserror::Error;

use crate::constraints::{ConstrainedTerm, Formula};
use crate::lctrs::{Lctrs, ReachabilityFormula};
use crate::signature::ValidationReport;

pub use ast::{GoalKind, Pos, SpecFile};
pub use parser::{parse_cterm, parse_expr, parse_spec};
pub use printer::print_spec;
pub use resolve::resolve;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {message}")]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

impl ParseError {
    pub fn new(pos: Pos, message: impl Into<String>) -> ParseError {
        ParseError {
            pos,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {message}")]
pub struct ResolutionError {
    pub pos: Pos,
    pub message: String,
}

impl ResolutionError {
    pub fn new(pos: Pos, message: impl Into<String>) -> ResolutionError {
        ResolutionError {
            pos,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("resolution error at {0}")]
    Resolution(#[from] ResolutionError),
    #[error("signature rejected:\n{0}")]
    Signature(ValidationReport),
}

/// Search and oracle settings given in the `options` section.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpecOptions {
    pub max_depth: Option<usize>,
    pub max_branch: Option<usize>,
    pub node_budget: Option<usize>,
    pub timeout_ms: Option<u64>,
    pub enable_disj: Option<bool>,
    pub bound: Option<u32>,
    pub steps: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecGoal {
    pub kind: GoalKind,
    pub formula: ReachabilityFormula,
    pub splits: Vec<Formula>,
    pub pos: Pos,
}

/// A resolved spec file.
#[derive(Clone, Debug)]
pub struct Spec {
    pub lctrs: Lctrs,
    pub goals: Vec<SpecGoal>,
    pub options: SpecOptions,
}

impl Spec {
    /// The goal set in file order with duplicates merged, and the case
    /// splits of each member.
    pub fn goal_set(&self) -> (Vec<ReachabilityFormula>, Vec<Vec<Formula>>) {
        let mut goals: Vec<ReachabilityFormula> = Vec::new();
        let mut splits: Vec<Vec<Formula>> = Vec::new();
        for g in &self.goals {
            match goals.iter().position(|f| *f == g.formula) {
                Some(i) => splits[i].extend(g.splits.iter().cloned()),
                None => {
                    goals.push(g.formula.clone());
                    splits.push(g.splits.clone());
                }
            }
        }
        (goals, splits)
    }

    /// Resolves a standalone constrained term against this spec.
    pub fn cterm(&self, src: &str) -> Result<ConstrainedTerm, SpecError> {
        let ct = parse_cterm(src)?;
        Ok(resolve::cterm(self.lctrs.signature(), &ct)?)
    }
}

/// Parses, resolves and validates a spec file.
pub fn load(src: &str) -> Result<Spec, SpecError> {
    resolve(&parse_spec(src)?)
}

#[cfg(test)]
mod tests;
