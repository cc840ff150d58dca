//! Equivalence-preserving formula simplification.
//!
//! Each pass rewrites bottom-up; passes repeat until nothing changes or the
//! pass cap is reached. Bindings `x = t` are only propagated from positive
//! conjunctive context.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_traits::{One, Zero};

use super::{alpha_eq, ConstrainedTerm, Formula};
use crate::signature::BuiltinOp;
use crate::terms::{eval_builtin, Op, Subst, Term, Value, Var};

pub const SIMPLIFY_PASS_CAP: usize = 10;

static CAP_HITS: AtomicUsize = AtomicUsize::new(0);

/// Number of simplifier runs that stopped at the pass cap in this process.
pub fn simplifier_cap_hits() -> usize {
    CAP_HITS.load(Ordering::Relaxed)
}

/// Folds ground builtin subterms and a few arithmetic identities.
pub fn simplify_term(t: &Term) -> Term {
    match t {
        Term::Var(_) | Term::Lit(_) => t.clone(),
        Term::App(Op::Ctor(c), args) => Term::App(
            Op::Ctor(c.clone()),
            args.iter().map(simplify_term).collect(),
        ),
        Term::App(Op::Builtin(op), args) => {
            let args: Vec<Term> = args.iter().map(simplify_term).collect();
            let lits: Option<Vec<Value>> = args
                .iter()
                .map(|a| match a {
                    Term::Lit(v) => Some(v.clone()),
                    _ => None,
                })
                .collect();
            if let Some(vals) = lits {
                if let Some(v) = eval_builtin(*op, &vals) {
                    return Term::Lit(v);
                }
            }
            let int = |t: &Term| t.as_int().cloned();
            match (op, args.as_slice()) {
                (BuiltinOp::Add, [a, b]) if int(b).is_some_and(|n| n.is_zero()) => a.clone(),
                (BuiltinOp::Add, [a, b]) if int(a).is_some_and(|n| n.is_zero()) => b.clone(),
                (BuiltinOp::Sub, [a, b]) if int(b).is_some_and(|n| n.is_zero()) => a.clone(),
                (BuiltinOp::Mul, [a, b]) if int(b).is_some_and(|n| n.is_one()) => a.clone(),
                (BuiltinOp::Mul, [a, b]) if int(a).is_some_and(|n| n.is_one()) => b.clone(),
                (BuiltinOp::Add, [Term::App(Op::Builtin(BuiltinOp::Add), inner), c]) => {
                    match (int(&inner[1]), int(c)) {
                        (Some(x), Some(y)) => simplify_term(&Term::add(inner[0].clone(), Term::int(x + y))),
                        _ => Term::builtin(*op, args),
                    }
                }
                _ => Term::builtin(*op, args),
            }
        }
    }
}

/// Simplifies a formula to an equivalent one.
pub fn simplify(f: &Formula) -> Formula {
    let mut cur = f.clone();
    for _ in 0..SIMPLIFY_PASS_CAP {
        let next = pass(&cur);
        if next == cur {
            return cur;
        }
        cur = next;
    }
    CAP_HITS.fetch_add(1, Ordering::Relaxed);
    log::debug!("simplifier reached its pass cap on {f}");
    cur
}

fn pass(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Eq(a, b) => simplify_eq(simplify_term(a), simplify_term(b)),
        Formula::Atom(t) => simplify_atom(simplify_term(t)),
        Formula::Not(g) => match pass(g) {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(h) => *h,
            g => Formula::not(g),
        },
        Formula::And(gs) => simplify_and(gs.iter().map(pass).collect()),
        Formula::Or(gs) => simplify_or(gs.iter().map(pass).collect()),
        Formula::Implies(a, b) => match (pass(a), pass(b)) {
            (Formula::True, b) => b,
            (Formula::False, _) | (_, Formula::True) => Formula::True,
            (a, Formula::False) => Formula::not(a),
            (a, b) if alpha_eq(&a, &b) => Formula::True,
            (a, b) => Formula::implies(a, b),
        },
        Formula::Iff(a, b) => match (pass(a), pass(b)) {
            (a, b) if alpha_eq(&a, &b) => Formula::True,
            (Formula::True, x) | (x, Formula::True) => x,
            (Formula::False, x) | (x, Formula::False) => Formula::not(x),
            (a, b) => Formula::iff(a, b),
        },
        Formula::Exists(vs, body) => simplify_exists(vs.clone(), pass(body)),
        Formula::Forall(vs, body) => {
            let body = pass(body);
            let free = body.free_vars();
            let vs: Vec<Var> = vs.iter().filter(|v| free.contains(v)).cloned().collect();
            match body {
                Formula::True | Formula::False => body,
                body => Formula::forall(vs, body),
            }
        }
    }
}

fn simplify_eq(a: Term, b: Term) -> Formula {
    if a == b {
        return Formula::True;
    }
    match (&a, &b) {
        (Term::Lit(x), Term::Lit(y)) => {
            if x == y {
                Formula::True
            } else {
                Formula::False
            }
        }
        (Term::App(Op::Ctor(f), xs), Term::App(Op::Ctor(g), ys)) => {
            if f.name != g.name || xs.len() != ys.len() {
                return Formula::False;
            }
            Formula::and(
                xs.iter()
                    .zip(ys.iter())
                    .map(|(x, y)| simplify_eq(x.clone(), y.clone())),
            )
        }
        (Term::App(Op::Ctor(_), _), other) | (other, Term::App(Op::Ctor(_), _))
            if other.is_builtin_headed() =>
        {
            Formula::False
        }
        (Term::Var(x), t @ Term::App(Op::Ctor(_), _)) | (t @ Term::App(Op::Ctor(_), _), Term::Var(x))
            if t.contains_var(x) =>
        {
            Formula::False
        }
        _ => Formula::Eq(a, b),
    }
}

fn simplify_atom(t: Term) -> Formula {
    match t {
        Term::Lit(Value::Bool(true)) => Formula::True,
        Term::Lit(Value::Bool(false)) => Formula::False,
        Term::App(Op::Builtin(BuiltinOp::Not), args) => Formula::not(simplify_atom(args[0].clone())),
        Term::App(Op::Builtin(BuiltinOp::And), args) => {
            Formula::And(args.iter().cloned().map(simplify_atom).collect())
        }
        Term::App(Op::Builtin(BuiltinOp::Or), args) => {
            Formula::Or(args.iter().cloned().map(simplify_atom).collect())
        }
        t => Formula::Atom(t),
    }
}

fn is_complement(a: &Formula, b: &Formula) -> bool {
    match (a, b) {
        (Formula::Not(x), y) | (y, Formula::Not(x)) => alpha_eq(x, y),
        _ => false,
    }
}

fn push_unique(out: &mut Vec<Formula>, g: Formula) -> bool {
    if out.iter().any(|h| is_complement(h, &g)) {
        return false;
    }
    if !out.iter().any(|h| alpha_eq(h, &g)) {
        out.push(g);
    }
    true
}

fn simplify_and(gs: Vec<Formula>) -> Formula {
    let mut out: Vec<Formula> = Vec::new();
    for g in gs {
        match g {
            Formula::True => {}
            Formula::False => return Formula::False,
            Formula::And(hs) => {
                for h in hs {
                    if !push_unique(&mut out, h) {
                        return Formula::False;
                    }
                }
            }
            g => {
                if !push_unique(&mut out, g) {
                    return Formula::False;
                }
            }
        }
    }
    let out = propagate_constants(out);
    match out.len() {
        0 => Formula::True,
        1 => out.into_iter().next().unwrap(),
        _ => Formula::And(out),
    }
}

// Substitutes `x = literal` conjuncts into their siblings.
fn propagate_constants(conjuncts: Vec<Formula>) -> Vec<Formula> {
    let mut sigma = Subst::new();
    for c in &conjuncts {
        if let Formula::Eq(a, b) = c {
            match (a, b) {
                (Term::Var(x), l @ Term::Lit(_)) | (l @ Term::Lit(_), Term::Var(x))
                    if !sigma.contains(x) && l.sort() == x.sort =>
                {
                    sigma.insert(x.clone(), l.clone());
                }
                _ => {}
            }
        }
    }
    if sigma.is_empty() {
        return conjuncts;
    }
    conjuncts
        .into_iter()
        .map(|c| match &c {
            Formula::Eq(Term::Var(x), l @ Term::Lit(_)) | Formula::Eq(l @ Term::Lit(_), Term::Var(x))
                if sigma.get(x) == Some(l) =>
            {
                c
            }
            _ => c.apply(&sigma),
        })
        .collect()
}

fn simplify_or(gs: Vec<Formula>) -> Formula {
    let mut out: Vec<Formula> = Vec::new();
    for g in gs {
        let parts = match g {
            Formula::False => continue,
            Formula::True => return Formula::True,
            Formula::Or(hs) => hs,
            g => vec![g],
        };
        for h in parts {
            if out.iter().any(|o| is_complement(o, &h)) {
                return Formula::True;
            }
            if !out.iter().any(|o| alpha_eq(o, &h)) {
                out.push(h);
            }
        }
    }
    match out.len() {
        0 => Formula::False,
        1 => out.into_iter().next().unwrap(),
        _ => Formula::Or(out),
    }
}

fn simplify_exists(vs: Vec<Var>, body: Formula) -> Formula {
    let free = body.free_vars();
    let mut vs: Vec<Var> = vs.into_iter().filter(|v| free.contains(v)).collect();
    if vs.is_empty() || matches!(body, Formula::True | Formula::False) {
        return body;
    }
    if let Formula::Or(ds) = body {
        return Formula::Or(
            ds.into_iter()
                .map(|d| simplify_exists(vs.clone(), d))
                .collect(),
        );
    }
    let mut conj: Vec<Formula> = body.conjuncts().into_iter().cloned().collect();
    // Eliminate x = t for bound x not occurring in t.
    loop {
        let found = conj.iter().enumerate().find_map(|(i, c)| {
            let Formula::Eq(a, b) = c else { return None };
            [(a, b), (b, a)].into_iter().find_map(|(l, r)| match l {
                Term::Var(x) if vs.contains(x) && !r.contains_var(x) && r.sort() == x.sort => {
                    Some((i, x.clone(), r.clone()))
                }
                _ => None,
            })
        });
        let Some((i, x, t)) = found else { break };
        conj.remove(i);
        let sigma = Subst::singleton(x.clone(), t);
        conj = conj.iter().map(|c| c.apply(&sigma)).collect();
        vs.retain(|v| *v != x);
    }
    // Pull out conjuncts independent of the binders.
    let bound: BTreeSet<&Var> = vs.iter().collect();
    let (inner, outer): (Vec<Formula>, Vec<Formula>) = conj
        .into_iter()
        .partition(|c| c.free_vars().iter().any(|v| bound.contains(v)));
    let inner_body = Formula::and(inner);
    let inner_free = inner_body.free_vars();
    let vs: Vec<Var> = vs.into_iter().filter(|v| inner_free.contains(v)).collect();
    let quantified = if vs.is_empty() {
        inner_body
    } else {
        Formula::Exists(vs, Box::new(inner_body))
    };
    Formula::and(outer.into_iter().chain(std::iter::once(quantified)))
}

/// Simplifies a constrained term, eliminating top-level bindings `x = t` of
/// free variables outside `protected` by substituting into both the term
/// and the constraint. Fresh variables are eliminated first.
pub fn simplify_ct(ct: &ConstrainedTerm, protected: &BTreeSet<Var>) -> ConstrainedTerm {
    let mut term = simplify_term(&ct.term);
    let mut constraint = simplify(&ct.constraint);
    for _ in 0..64 {
        if constraint == Formula::False {
            break;
        }
        let conj: Vec<&Formula> = constraint.conjuncts();
        let mut best: Option<(usize, Var, Term)> = None;
        for (i, c) in conj.iter().enumerate() {
            let Formula::Eq(a, b) = c else { continue };
            for (l, r) in [(a, b), (b, a)] {
                let Term::Var(x) = l else { continue };
                if protected.contains(x) || r.contains_var(x) || r.sort() != x.sort {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some((_, y, _)) => x.is_fresh() && !y.is_fresh(),
                };
                if better {
                    best = Some((i, x.clone(), r.clone()));
                }
            }
        }
        let Some((i, x, t)) = best else { break };
        let rest: Vec<Formula> = conj
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, c)| (*c).clone())
            .collect();
        let sigma = Subst::singleton(x, t);
        term = simplify_term(&term.apply(&sigma));
        constraint = simplify(&Formula::and(rest).apply(&sigma));
    }
    ConstrainedTerm { term, constraint }
}
