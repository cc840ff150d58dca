//! Ground semantics on a bounded domain: instance enumeration, transition
//! graphs, demonic validity, and cross-checks of the symbolic layer.
//!
//! Quantifiers are evaluated over the domain only, so a constraint whose
//! witnesses lie outside `[-B, B]` is read as false there.

pub mod dvp;
pub mod eval;
pub mod graph;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use serde::Serialize;
use thiserror::Error;

use crate::constraints::ConstrainedTerm;
use crate::lctrs::{derivatives, Lctrs, ReachabilityFormula};
use crate::par::Exec;
use crate::smt::{SatChecker, SmtError};
use crate::terms::{FreshCounter, Term, Value, Var};

pub use dvp::{check_dvp, exhaustive_paths, path_satisfies, DvpVerdict, Path, PathError, PathSearch};
pub use eval::{Env, Evaluator};
pub use graph::{build_graph, ground_step, parse_edge_list, EdgeListGraph, TransitionGraph};

/// Integers in `[-bound, bound]` and both truth values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Domain {
    pub bound: u32,
}

impl Domain {
    pub fn new(bound: u32) -> Domain {
        Domain { bound }
    }

    pub fn ints(&self) -> impl Iterator<Item = i64> {
        let b = i64::from(self.bound);
        -b..=b
    }

    /// Whether every integer literal in `t` lies in the domain.
    pub fn contains(&self, t: &Term) -> bool {
        match t {
            Term::Lit(Value::Int(n)) => n.magnitude() <= &BigUint::from(self.bound),
            Term::Lit(Value::Bool(_)) | Term::Var(_) => true,
            Term::App(_, args) => args.iter().all(|a| self.contains(a)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("quantifier over unbounded sort {0}")]
    UnsupportedQuantifier(String),
    #[error("variable of unbounded sort {0} cannot be enumerated")]
    UnboundedSort(String),
    #[error("too many ground terms of sort {0}")]
    TooLarge(String),
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("ill-sorted ground term {0}")]
    IllSorted(String),
    #[error(transparent)]
    Smt(#[from] SmtError),
}

/// `{α(t) | α ⊨ φ}` for valuations over the domain.
pub fn enumerate_instances(r: &Lctrs, ct: &ConstrainedTerm, dom: &Domain) -> Result<BTreeSet<Term>, OracleError> {
    Evaluator {
        sig: r.signature(),
        dom: *dom,
    }
    .instances_with(ct, &Env::new())
}

/// Both sides of the derivative theorem and their differences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivativeReport {
    pub symbolic: BTreeSet<Term>,
    pub ground: BTreeSet<Term>,
    pub only_symbolic: BTreeSet<Term>,
    pub only_ground: BTreeSet<Term>,
    pub incomplete: bool,
}

impl DerivativeReport {
    pub fn agrees(&self) -> bool {
        self.only_symbolic.is_empty() && self.only_ground.is_empty()
    }
}

/// Compares the instances of the derivatives of `ct` with the one-step
/// image of the instances of `ct`. Variables of `ct` and rule variables
/// both range over the domain.
pub fn check_derivative_theorem(
    r: &Lctrs,
    ct: &ConstrainedTerm,
    dom: &Domain,
    checker: &dyn SatChecker,
    exec: Exec,
) -> Result<DerivativeReport, OracleError> {
    let ds = derivatives(r, ct, &BTreeSet::new(), &mut FreshCounter::new(), checker)?;
    let parts = exec.map(&ds.items, |d| enumerate_instances(r, &d.ct, dom));
    let mut symbolic = BTreeSet::new();
    for p in parts {
        symbolic.extend(p?);
    }
    let sources: Vec<Term> = enumerate_instances(r, ct, dom)?.into_iter().collect();
    let mut ground = BTreeSet::new();
    for s in exec.map(&sources, |g| ground_step(r, g, dom)) {
        ground.extend(s?);
    }
    Ok(DerivativeReport {
        only_symbolic: symbolic.difference(&ground).cloned().collect(),
        only_ground: ground.difference(&symbolic).cloned().collect(),
        symbolic,
        ground,
        incomplete: ds.incomplete,
    })
}

/// Validity of one instance of a goal: the shared variables fixed to
/// `shared`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceCheck {
    pub shared: BTreeMap<Var, Term>,
    pub sources: usize,
    pub verdict: DvpVerdict,
    pub graph: TransitionGraph<Term>,
    pub p: BTreeSet<usize>,
    pub q: BTreeSet<usize>,
}

/// Checks demonic validity of `goal` on the ground graph, once per
/// valuation of the variables shared by its two sides.
pub fn check_goal(
    r: &Lctrs,
    goal: &ReachabilityFormula,
    dom: &Domain,
    steps: usize,
    exec: Exec,
) -> Result<Vec<InstanceCheck>, OracleError> {
    let ev = Evaluator {
        sig: r.signature(),
        dom: *dom,
    };
    let shared: Vec<Var> = goal.shared_vars().into_iter().collect();
    let mut valuations = Vec::new();
    ev.brute_solutions(&crate::constraints::Formula::True, &shared, &Env::new(), &mut |env| {
        valuations.push(env.clone())
    })?;
    let results = exec.map(&valuations, |fixed| -> Result<InstanceCheck, OracleError> {
        let ev = Evaluator {
            sig: r.signature(),
            dom: *dom,
        };
        let seeds = ev.instances_with(&goal.lhs, fixed)?;
        let graph = build_graph(r, &seeds, dom, steps, Exec::Sequential)?;
        let p = graph.ids(&seeds);
        let mut q = BTreeSet::new();
        for (i, n) in graph.nodes().iter().enumerate() {
            if ev.is_instance(&goal.rhs, n, fixed)? {
                q.insert(i);
            }
        }
        Ok(InstanceCheck {
            shared: fixed.clone(),
            sources: seeds.len(),
            verdict: check_dvp(&graph, &p, &q),
            graph,
            p,
            q,
        })
    });
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::tests::{psi, v};
    use crate::constraints::Formula;
    use crate::lctrs::tests::{comp, compositeness, init, looop, psi_i};
    use crate::signature::BuiltinOp;
    use crate::smt::{AssumeSat, Solver, SolverConfig};

    #[test]
    fn instance_examples() {
        let r = compositeness();
        let d = Domain::new(12);
        let got = enumerate_instances(&r, &ConstrainedTerm::new(init(v("n")), psi()), &d).unwrap();
        let want: BTreeSet<Term> = [4, 6, 8, 9, 10, 12].into_iter().map(|n| init(Term::int(n))).collect();
        assert_eq!(got, want);
        let c = enumerate_instances(&r, &ConstrainedTerm::new(comp(), Formula::True), &d).unwrap();
        assert_eq!(c, BTreeSet::from([comp()]));
        assert!(enumerate_instances(&r, &ConstrainedTerm::new(init(v("n")), Formula::False), &d)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn domain_membership() {
        let d = Domain::new(3);
        assert!(d.contains(&looop(Term::int(-3), Term::int(3))));
        assert!(!d.contains(&looop(Term::int(4), Term::int(0))));
    }

    fn checker() -> Box<dyn SatChecker> {
        let s = Solver::new(SolverConfig::resolve(None));
        if s.is_available() {
            Box::new(s)
        } else {
            Box::new(AssumeSat)
        }
    }

    #[test]
    fn derivative_theorem_examples() {
        let r = compositeness();
        let c = checker();
        let rep = check_derivative_theorem(
            &r,
            &ConstrainedTerm::new(init(v("n")), psi()),
            &Domain::new(12),
            c.as_ref(),
            Exec::Sequential,
        )
        .unwrap();
        assert!(rep.agrees(), "{rep:?}");
        assert_eq!(rep.ground.len(), 6);

        let rep =
            check_derivative_theorem(&r, &ConstrainedTerm::new(comp(), Formula::True), &Domain::new(12), c.as_ref(), Exec::Sequential)
                .unwrap();
        assert!(rep.agrees() && rep.ground.is_empty());

        let le = |a, b| Formula::cmp(BuiltinOp::Le, a, b);
        let ct = ConstrainedTerm::new(
            looop(v("n"), v("i")),
            Formula::and([le(Term::int(2), v("i")), le(v("i"), v("n")), le(v("n"), Term::int(6))]),
        );
        let rep = check_derivative_theorem(&r, &ct, &Domain::new(8), c.as_ref(), Exec::Parallel).unwrap();
        assert!(rep.agrees(), "{rep:?}");
        let rep = check_derivative_theorem(
            &r,
            &ConstrainedTerm::new(looop(v("n"), v("i")), psi_i()),
            &Domain::new(6),
            c.as_ref(),
            Exec::Parallel,
        )
        .unwrap();
        assert!(rep.agrees(), "{rep:?}");
    }

    #[test]
    fn compositeness_goal_is_valid_on_the_graph() {
        let r = compositeness();
        let goal = ReachabilityFormula::new(
            ConstrainedTerm::new(init(v("n")), psi()),
            ConstrainedTerm::new(comp(), Formula::True),
        );
        let checks = check_goal(&r, &goal, &Domain::new(12), 40, Exec::Parallel).unwrap();
        assert_eq!(checks.len(), 1);
        assert_eq!(checks[0].verdict, DvpVerdict::Valid);
        assert_eq!(checks[0].sources, 6);
    }

    #[test]
    fn primes_do_not_reach_comp() {
        let r = compositeness();
        let goal = ReachabilityFormula::new(
            ConstrainedTerm::new(init(v("n")), Formula::cmp(BuiltinOp::Ge, v("n"), Term::int(2))),
            ConstrainedTerm::new(comp(), Formula::True),
        );
        let checks = check_goal(&r, &goal, &Domain::new(12), 40, Exec::Sequential).unwrap();
        assert!(matches!(checks[0].verdict, DvpVerdict::Inconclusive { .. }));
    }
}
