//! Rewrite systems, reachability formulas and symbolic successors.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::constraints::{simplify_ct, unify_modulo_builtins, ConstrainedTerm, Formula};
use crate::signature::{Signature, Sort};
use crate::smt::{SatChecker, SmtError, Verdict};
use crate::terms::{FreshCounter, Op, Position, Term, Var};

/// A rule `lhs → rhs if guard`. Variables of `rhs` and `guard` need not
/// occur in `lhs`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RewriteRule {
    pub lhs: Term,
    pub rhs: Term,
    pub guard: Formula,
}

impl RewriteRule {
    pub fn new(lhs: Term, rhs: Term, guard: Formula) -> RewriteRule {
        RewriteRule { lhs, rhs, guard }
    }

    /// All variables, including those bound in the guard.
    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut vs = self.lhs.vars();
        vs.extend(self.rhs.vars());
        vs.extend(self.guard.all_vars());
        vs
    }

    pub fn rename_fresh(&self, ctr: &mut FreshCounter) -> RewriteRule {
        let map = ctr.renaming(&self.all_vars());
        RewriteRule {
            lhs: self.lhs.rename(&map),
            rhs: self.rhs.rename(&map),
            guard: self.guard.rename_all(&map),
        }
    }
}

impl fmt::Display for RewriteRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} => {}", self.lhs, self.rhs)?;
        if self.guard != Formula::True {
            write!(f, " if {}", self.guard)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LctrsError {
    #[error("rule {index} ({rule}): {reason}")]
    IllSortedRule {
        index: usize,
        rule: String,
        reason: String,
    },
}

/// A set of rules over a signature.
#[derive(Clone, Debug)]
pub struct Lctrs {
    sig: Arc<Signature>,
    rules: Vec<RewriteRule>,
}

impl Lctrs {
    pub fn new(sig: Arc<Signature>, rules: Vec<RewriteRule>) -> Result<Lctrs, LctrsError> {
        for (index, r) in rules.iter().enumerate() {
            let fail = |reason: String| LctrsError::IllSortedRule {
                index,
                rule: r.to_string(),
                reason,
            };
            if !r.lhs.is_ctor_app() {
                return Err(fail("left-hand side must be a constructor application".into()));
            }
            let ls = sig.least_sort(&r.lhs).map_err(|e| fail(e.to_string()))?;
            let rs = sig.least_sort(&r.rhs).map_err(|e| fail(e.to_string()))?;
            if ls.is_builtin() {
                return Err(fail("left-hand side has a builtin sort".into()));
            }
            if !sig.connected(&ls, &rs) {
                return Err(fail(format!("sides have unrelated sorts {ls} and {rs}")));
            }
        }
        Ok(Lctrs { sig, rules })
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn rules(&self) -> &[RewriteRule] {
        &self.rules
    }

    /// Whether instances of a variable of sort `s` may contain a redex.
    pub fn sort_may_host_redex(&self, s: &Sort) -> bool {
        let lhs_sorts: Vec<Sort> = self.rules.iter().map(|r| r.lhs.sort()).collect();
        let mut seen: BTreeSet<Sort> = BTreeSet::new();
        let mut stack = vec![s.clone()];
        while let Some(q) = stack.pop() {
            if q.is_builtin() || !seen.insert(q.clone()) {
                continue;
            }
            if lhs_sorts.iter().any(|l| self.sig.connected(l, &q)) {
                return true;
            }
            for sub in self.sig.all_sorts() {
                if self.sig.leq(&sub, &q) {
                    stack.push(sub);
                }
            }
            for d in self.sig.symbols() {
                if self.sig.leq(&d.result, &q) {
                    stack.extend(d.args.iter().cloned());
                }
            }
        }
        false
    }
}

/// A goal `lhs ⇒ rhs`; variables shared by both sides are instantiated
/// consistently.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReachabilityFormula {
    pub lhs: ConstrainedTerm,
    pub rhs: ConstrainedTerm,
}

impl ReachabilityFormula {
    pub fn new(lhs: ConstrainedTerm, rhs: ConstrainedTerm) -> ReachabilityFormula {
        ReachabilityFormula { lhs, rhs }
    }

    pub fn shared_vars(&self) -> BTreeSet<Var> {
        self.lhs
            .free_vars()
            .intersection(&self.rhs.free_vars())
            .cloned()
            .collect()
    }

    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut vs = self.lhs.term.vars();
        vs.extend(self.lhs.constraint.all_vars());
        vs.extend(self.rhs.term.vars());
        vs.extend(self.rhs.constraint.all_vars());
        vs
    }

    pub fn rename_fresh(&self, ctr: &mut FreshCounter) -> ReachabilityFormula {
        let map = ctr.renaming(&self.all_vars());
        ReachabilityFormula {
            lhs: self.lhs.rename_all(&map),
            rhs: self.rhs.rename_all(&map),
        }
    }
}

impl fmt::Display for ReachabilityFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} => {}", self.lhs, self.rhs)
    }
}

/// One symbolic successor and where it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivative {
    pub ct: ConstrainedTerm,
    pub rule: usize,
    pub position: Position,
    /// `Unknown` when the solver could not confirm satisfiability; such
    /// derivatives are kept.
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DerivativeSet {
    pub items: Vec<Derivative>,
    /// Set when successors may be missing: a user-sorted variable of the
    /// subject could be instantiated to a redex, or unification hit an
    /// unresolvable sort restriction.
    pub incomplete: bool,
}

impl DerivativeSet {
    pub fn cts(&self) -> Vec<ConstrainedTerm> {
        self.items.iter().map(|d| d.ct.clone()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn has_unknown(&self) -> bool {
        self.items.iter().any(|d| d.verdict == Verdict::Unknown)
    }
}

/// Symbolic one-step successors of `ct` by narrowing at non-variable
/// positions. Variables in `protect` (and those of `ct`) are kept when
/// simplifying the results.
pub fn derivatives(
    r: &Lctrs,
    ct: &ConstrainedTerm,
    protect: &BTreeSet<Var>,
    ctr: &mut FreshCounter,
    checker: &dyn SatChecker,
) -> Result<DerivativeSet, SmtError> {
    let sig = r.signature();
    let mut protected = ct.free_vars();
    protected.extend(protect.iter().cloned());
    let mut out = DerivativeSet {
        items: Vec::new(),
        incomplete: ct
            .term
            .vars()
            .iter()
            .any(|v| !v.sort.is_builtin() && r.sort_may_host_redex(&v.sort)),
    };
    if ct.constraint == Formula::False {
        return Ok(out);
    }
    for p in ct.term.non_variable_positions() {
        let sub = ct.term.subterm_at(&p).expect("position from the term itself");
        if !matches!(sub, Term::App(Op::Ctor(_), _)) {
            continue;
        }
        for (idx, rule) in r.rules().iter().enumerate() {
            if !sig.connected(&sub.sort(), &rule.lhs.sort()) {
                continue;
            }
            let fresh = rule.rename_fresh(ctr);
            let solved = match unify_modulo_builtins(sig, sub, &fresh.lhs) {
                Ok(s) => s,
                Err(e) => {
                    log::debug!("skipping rule {idx} at {p:?}: {e}");
                    out.incomplete = true;
                    continue;
                }
            };
            for sf in solved {
                let constraint = Formula::and([ct.constraint.clone(), sf.to_formula(), fresh.guard.clone()]);
                let term = ct.term.replace_unchecked(&p, fresh.rhs.clone());
                let cand = simplify_ct(&ConstrainedTerm::new(term, constraint), &protected);
                let verdict = match checker.check_sat(&cand.constraint) {
                    Ok(v) => v,
                    Err(SmtError::Encode(_)) => Verdict::Unknown,
                    Err(e) => return Err(e),
                };
                match verdict {
                    Verdict::Unsat => continue,
                    Verdict::Unknown => log::warn!("kept derivative with undecided constraint: {}", cand),
                    Verdict::Sat => {}
                }
                out.items.push(Derivative {
                    ct: cand,
                    rule: idx,
                    position: p.clone(),
                    verdict,
                });
            }
        }
    }
    Ok(out)
}

pub fn is_derivable(
    r: &Lctrs,
    ct: &ConstrainedTerm,
    ctr: &mut FreshCounter,
    checker: &dyn SatChecker,
) -> Result<bool, SmtError> {
    Ok(!derivatives(r, ct, &BTreeSet::new(), ctr, checker)?.is_empty())
}

/// `φ_l → ⋁_j ∃ỹ^j. φ^j` where `ỹ^j` are the variables of the j-th
/// derivative not occurring in `ct`.
pub fn totality_condition(ct: &ConstrainedTerm, ds: &[ConstrainedTerm]) -> Formula {
    let own = ct.free_vars();
    let disjuncts = ds.iter().map(|d| {
        let ys: Vec<Var> = d.constraint.free_vars().difference(&own).cloned().collect();
        Formula::exists(ys, d.constraint.clone())
    });
    Formula::implies(ct.constraint.clone(), Formula::or(disjuncts))
}
