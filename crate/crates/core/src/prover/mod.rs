//! Bounded proof search for reachability formulas.
//!
//! Rules are tried per goal in the order axiom, subs, circ (goal list
//! order), der-forall, disj; the first alternative that closes wins.

mod tree;

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};

use thiserror::Error;

use crate::constraints::{simplify, simplify_ct, unify_modulo_builtins, ConstrainedTerm, Formula};
use crate::lctrs::{derivatives, totality_condition, Lctrs, ReachabilityFormula};
use crate::par::Exec;
use crate::signature::Signature;
use crate::smt::{SatChecker, SmtError};
use crate::terms::{FreshCounter, Subst, Term, Var};

pub use tree::{check_guarded, reverify, Answer, NodeKind, ProofTree, Query, SideCondition};

#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Maximum number of der-forall steps on any branch.
    pub max_der_depth: usize,
    /// Maximum number of derivatives a der-forall step may produce.
    pub max_branching: usize,
    pub enable_disj: bool,
    /// Maximum number of goal nodes visited per goal, across backtracking.
    pub node_budget: usize,
    pub exec: Exec,
}

impl Default for SearchConfig {
    fn default() -> SearchConfig {
        SearchConfig {
            max_der_depth: 20,
            max_branching: 64,
            enable_disj: false,
            node_budget: 5000,
            exec: Exec::default(),
        }
    }
}

/// A node of the search: the formula plus the branch history the rules
/// depend on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Goal {
    pub formula: ReachabilityFormula,
    /// der-forall steps between the root and this goal.
    pub depth: usize,
    pub has_der_ancestor: bool,
    /// Whether this goal is the residual of a subs step.
    pub after_subs: bool,
    /// Circ steps since the last der-forall.
    pub circ_streak: usize,
    pub disj_uses: usize,
}

impl Goal {
    pub fn root(formula: ReachabilityFormula) -> Goal {
        Goal {
            formula,
            depth: 0,
            has_der_ancestor: false,
            after_subs: false,
            circ_streak: 0,
            disj_uses: 0,
        }
    }

    fn child(&self, formula: ReachabilityFormula) -> Goal {
        Goal {
            formula,
            after_subs: false,
            ..self.clone()
        }
    }

    fn protected(&self) -> BTreeSet<Var> {
        let mut vs = self.formula.lhs.free_vars();
        vs.extend(self.formula.rhs.free_vars());
        vs
    }

    /// The goal with its left-hand side replaced and simplified.
    fn with_lhs(&self, term: Term, constraint: Formula) -> ReachabilityFormula {
        let lhs = simplify_ct(&ConstrainedTerm::new(term, constraint), &self.protected());
        ReachabilityFormula::new(lhs, self.formula.rhs.clone())
    }
}

/// One rule application: its side conditions and premises.
#[derive(Clone, Debug)]
pub struct Step {
    pub kind: NodeKind,
    pub side_conditions: Vec<SideCondition>,
    pub children: Vec<Goal>,
    pub circularity_used: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProverError {
    #[error("circularity applied without a der-forall ancestor")]
    GuardednessViolation,
    #[error("split is not equivalent to the goal constraint ({0})")]
    InvalidSplit(Answer),
    #[error(transparent)]
    Smt(#[from] SmtError),
}

/// Asks a satisfiability question. Only an unavailable solver is an error;
/// encoding problems and malformed answers count as `Unknown`.
fn ask(checker: &dyn SatChecker, query: Query, f: Formula) -> Result<SideCondition, SmtError> {
    match SideCondition::ask(checker, query, f.clone()) {
        Err(SmtError::SolverUnavailable(m)) => Err(SmtError::SolverUnavailable(m)),
        Err(e) => {
            log::warn!("treating solver failure as unknown: {e}");
            Ok(SideCondition {
                formula: f,
                query,
                answer: Answer::Unknown,
            })
        }
        ok => ok,
    }
}

/// `⋁ solved forms of a = b`, or `None` when unification is not supported.
fn equation(sig: &Signature, a: &Term, b: &Term) -> Option<Formula> {
    let solved = unify_modulo_builtins(sig, a, b).ok()?;
    Some(Formula::or(solved.iter().map(|s| s.to_formula())))
}

/// Closes the goal when its left-hand constraint is unsatisfiable.
pub fn apply_axiom(g: &Goal, checker: &dyn SatChecker) -> Result<Option<Step>, SmtError> {
    let c = ask(checker, Query::Sat, g.formula.lhs.constraint.clone())?;
    Ok((c.answer == Answer::Unsat).then(|| Step {
        kind: NodeKind::Axiom,
        side_conditions: vec![c],
        children: vec![],
        circularity_used: None,
    }))
}

/// Removes the instances of the left-hand side already covered by the
/// right-hand side.
pub fn apply_subs(sig: &Signature, g: &Goal, checker: &dyn SatChecker) -> Result<Option<Step>, SmtError> {
    let ReachabilityFormula { lhs, rhs } = &g.formula;
    let own = lhs.free_vars();
    let xs: Vec<Var> = rhs.free_vars().difference(&own).cloned().collect();
    let Some(eq) = equation(sig, &lhs.term, &rhs.term) else {
        return Ok(None);
    };
    let phi = simplify(&Formula::exists(xs, Formula::and([eq, rhs.constraint.clone()])));
    if phi == Formula::False {
        return Ok(None);
    }
    let c = ask(checker, Query::Sat, Formula::and([lhs.constraint.clone(), phi.clone()]))?;
    if c.answer != Answer::Sat {
        return Ok(None);
    }
    let mut child = g.child(g.with_lhs(lhs.term.clone(), Formula::and([lhs.constraint.clone(), Formula::not(phi)])));
    child.after_subs = true;
    Ok(Some(Step {
        kind: NodeKind::Subs,
        side_conditions: vec![c],
        children: vec![child],
        circularity_used: None,
    }))
}

/// Replaces the goal by one goal per derivative of its left-hand side,
/// provided the derivatives cover every instance.
pub fn apply_der(
    r: &Lctrs,
    g: &Goal,
    max_branching: usize,
    ctr: &mut FreshCounter,
    checker: &dyn SatChecker,
) -> Result<Option<Step>, SmtError> {
    let lhs = &g.formula.lhs;
    let ds = derivatives(r, lhs, &g.formula.rhs.free_vars(), ctr, checker)?;
    if ds.incomplete {
        log::debug!("derivatives of {lhs} may be incomplete; der-forall refused");
        return Ok(None);
    }
    if ds.is_empty() || ds.len() > max_branching {
        return Ok(None);
    }
    let cts = ds.cts();
    let c = ask(checker, Query::Valid, totality_condition(lhs, &cts))?;
    if c.answer != Answer::Valid {
        return Ok(None);
    }
    let children = cts
        .into_iter()
        .map(|d| Goal {
            formula: ReachabilityFormula::new(d, g.formula.rhs.clone()),
            depth: g.depth + 1,
            has_der_ancestor: true,
            after_subs: false,
            circ_streak: 0,
            disj_uses: g.disj_uses,
        })
        .collect();
    Ok(Some(Step {
        kind: NodeKind::DerForall,
        side_conditions: vec![c],
        children,
        circularity_used: None,
    }))
}

/// Uses goal `circs[index]` as an axiom. The circularity applies only when
/// its right-hand side is a renaming of the goal's; variables it shares
/// between its sides are identified with the goal's.
pub fn apply_circ(
    sig: &Signature,
    g: &Goal,
    circs: &[ReachabilityFormula],
    index: usize,
    ctr: &mut FreshCounter,
    checker: &dyn SatChecker,
) -> Result<Option<Step>, ProverError> {
    if !g.has_der_ancestor {
        return Err(ProverError::GuardednessViolation);
    }
    let c = circs[index].rename_fresh(ctr);
    let Some(rho) = crate::constraints::alpha_match_ct(&c.rhs, &g.formula.rhs) else {
        return Ok(None);
    };
    let shared = c.shared_vars();
    let sigma: Subst = rho.into_iter().map(|(a, b)| (a, Term::Var(b))).collect();
    let cl = c.lhs.apply(&sigma);
    let cr = c.rhs.apply(&sigma);
    let lhs = &g.formula.lhs;
    let Some(eq) = equation(sig, &lhs.term, &cl.term) else {
        return Ok(None);
    };
    let bind: Vec<Var> = c.lhs.free_vars().difference(&shared).cloned().collect();
    let phi = simplify(&Formula::exists(bind, Formula::and([eq, cl.constraint.clone()])));
    if phi == Formula::False {
        return Ok(None);
    }
    let cond = ask(checker, Query::Sat, Formula::and([lhs.constraint.clone(), phi.clone()]))?;
    if cond.answer != Answer::Sat {
        return Ok(None);
    }
    let mut covered = g.child(g.with_lhs(
        cr.term.clone(),
        Formula::and([lhs.constraint.clone(), phi.clone(), cr.constraint.clone()]),
    ));
    let mut rest = g.child(g.with_lhs(lhs.term.clone(), Formula::and([lhs.constraint.clone(), Formula::not(phi)])));
    covered.circ_streak += 1;
    rest.circ_streak += 1;
    Ok(Some(Step {
        kind: NodeKind::Circ,
        side_conditions: vec![cond],
        children: vec![covered, rest],
        circularity_used: Some(index),
    }))
}

/// Splits the left-hand constraint into two cases whose disjunction is
/// equivalent to it.
pub fn apply_disj(g: &Goal, split: (Formula, Formula), checker: &dyn SatChecker) -> Result<Step, ProverError> {
    let phi = &g.formula.lhs.constraint;
    let (a, b) = split;
    let iff = Formula::iff(phi.clone(), Formula::or([a.clone(), b.clone()]));
    let cond = ask(checker, Query::Valid, iff)?;
    if cond.answer != Answer::Valid {
        return Err(ProverError::InvalidSplit(cond.answer));
    }
    let t = &g.formula.lhs.term;
    let mut children = vec![g.child(g.with_lhs(t.clone(), a)), g.child(g.with_lhs(t.clone(), b))];
    for c in &mut children {
        c.disj_uses += 1;
    }
    Ok(Step {
        kind: NodeKind::Disj,
        side_conditions: vec![cond],
        children,
        circularity_used: None,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GoalOutcome {
    Proved(ProofTree),
    /// The search ended with open leaves; `partial` is the last attempt.
    Failed {
        frontier: Vec<ReachabilityFormula>,
        partial: ProofTree,
    },
    Aborted(String),
}

impl GoalOutcome {
    pub fn is_proved(&self) -> bool {
        matches!(self, GoalOutcome::Proved(_))
    }

    pub fn tree(&self) -> Option<&ProofTree> {
        match self {
            GoalOutcome::Proved(t) | GoalOutcome::Failed { partial: t, .. } => Some(t),
            GoalOutcome::Aborted(_) => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            GoalOutcome::Proved(_) => "proved",
            GoalOutcome::Failed { .. } => "failed",
            GoalOutcome::Aborted(_) => "aborted",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofResult {
    pub goals: Vec<(ReachabilityFormula, GoalOutcome)>,
}

impl ProofResult {
    pub fn all_proved(&self) -> bool {
        self.goals.iter().all(|(_, o)| o.is_proved())
    }
}

enum Abort {
    Budget,
    Solver(String),
}

impl From<SmtError> for Abort {
    fn from(e: SmtError) -> Abort {
        Abort::Solver(e.to_string())
    }
}

struct Search<'a> {
    r: &'a Lctrs,
    circs: &'a [ReachabilityFormula],
    splits: &'a [Formula],
    cfg: &'a SearchConfig,
    checker: &'a dyn SatChecker,
    visited: AtomicUsize,
}

impl Search<'_> {
    fn run(&self, g: Goal, ctr: &mut FreshCounter) -> Result<ProofTree, Abort> {
        if self.visited.fetch_add(1, Ordering::Relaxed) >= self.cfg.node_budget {
            return Err(Abort::Budget);
        }
        let sig = self.r.signature();
        if let Some(step) = apply_axiom(&g, self.checker)? {
            return self.expand(&g, step, ctr);
        }
        let mut last_failure = None;
        if !g.after_subs {
            if let Some(step) = apply_subs(sig, &g, self.checker)? {
                let t = self.expand(&g, step, ctr)?;
                if t.is_closed() {
                    return Ok(t);
                }
                last_failure = Some(t);
            }
        }
        if g.has_der_ancestor && g.circ_streak < 2 * self.circs.len() {
            for i in 0..self.circs.len() {
                let step = match apply_circ(sig, &g, self.circs, i, ctr, self.checker) {
                    Ok(Some(s)) => s,
                    Ok(None) => continue,
                    Err(ProverError::Smt(e)) => return Err(e.into()),
                    Err(e) => unreachable!("circ precondition checked: {e}"),
                };
                let t = self.expand(&g, step, ctr)?;
                if t.is_closed() {
                    return Ok(t);
                }
                last_failure = Some(t);
            }
        }
        if g.depth < self.cfg.max_der_depth {
            if let Some(step) = apply_der(self.r, &g, self.cfg.max_branching, ctr, self.checker)? {
                let t = self.expand(&g, step, ctr)?;
                if t.is_closed() {
                    return Ok(t);
                }
                last_failure = Some(t);
            }
        }
        if self.cfg.enable_disj && g.disj_uses < self.cfg.max_der_depth {
            let phi = &g.formula.lhs.constraint;
            for chi in self.splits {
                let a = simplify(&Formula::and([phi.clone(), chi.clone()]));
                let b = simplify(&Formula::and([phi.clone(), Formula::not(chi.clone())]));
                if a == Formula::False || b == Formula::False {
                    continue;
                }
                let step = match apply_disj(&g, (a, b), self.checker) {
                    Ok(s) => s,
                    Err(ProverError::Smt(e)) => return Err(e.into()),
                    Err(_) => continue,
                };
                let t = self.expand(&g, step, ctr)?;
                if t.is_closed() {
                    return Ok(t);
                }
                last_failure = Some(t);
            }
        }
        Ok(last_failure.unwrap_or_else(|| ProofTree::open(g.formula)))
    }

    /// Searches the premises left to right, stopping at the first that
    /// stays open.
    fn expand(&self, g: &Goal, step: Step, ctr: &mut FreshCounter) -> Result<ProofTree, Abort> {
        let mut children = Vec::with_capacity(step.children.len());
        let mut failed = false;
        for c in step.children {
            if failed {
                children.push(ProofTree::open(c.formula));
                continue;
            }
            let t = self.run(c, ctr)?;
            failed = !t.is_closed();
            children.push(t);
        }
        Ok(ProofTree {
            kind: step.kind,
            goal: g.formula.clone(),
            side_conditions: step.side_conditions,
            children,
            circularity_used: step.circularity_used,
        })
    }
}

/// Attempts a guarded proof of every member of `goals`, using all of them
/// as circularities. `splits[i]` lists the case splits allowed for goal `i`
/// when disj is enabled.
pub fn prove(
    r: &Lctrs,
    goals: &[ReachabilityFormula],
    splits: &[Vec<Formula>],
    cfg: &SearchConfig,
    checker: &dyn SatChecker,
) -> ProofResult {
    let indices: Vec<usize> = (0..goals.len()).collect();
    let outcomes = cfg.exec.map(&indices, |&i| {
        let search = Search {
            r,
            circs: goals,
            splits: splits.get(i).map(Vec::as_slice).unwrap_or(&[]),
            cfg,
            checker,
            visited: AtomicUsize::new(0),
        };
        let mut ctr = FreshCounter::new();
        match search.run(Goal::root(goals[i].clone()), &mut ctr) {
            Ok(t) if t.is_closed() => {
                debug_assert!(check_guarded(&t));
                debug_assert!(t.structural_errors().is_empty(), "{:?}", t.structural_errors());
                GoalOutcome::Proved(t)
            }
            Ok(t) => GoalOutcome::Failed {
                frontier: t.frontier(),
                partial: t,
            },
            Err(Abort::Budget) => GoalOutcome::Aborted(format!("node budget of {} exhausted", cfg.node_budget)),
            Err(Abort::Solver(m)) => GoalOutcome::Aborted(m),
        }
    });
    ProofResult {
        goals: goals.iter().cloned().zip(outcomes).collect(),
    }
}

/// Independent audit of a proved tree: guardedness, node shapes and a
/// fresh re-check of every side condition.
pub fn audit(t: &ProofTree, checker: &dyn SatChecker) -> Result<Vec<String>, SmtError> {
    let mut problems = t.structural_errors();
    if !check_guarded(t) {
        problems.push("unguarded circularity".into());
    }
    if !t.is_closed() {
        problems.push("open leaves".into());
    }
    problems.extend(reverify(t, checker)?);
    Ok(problems)
}

#[cfg(test)]
mod tests;
