//! First-order constraint formulas, constrained terms, simplification and
//! unification modulo builtins.

mod simplify;
mod unify;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use simplify::{simplify, simplify_ct, simplify_term, simplifier_cap_hits, SIMPLIFY_PASS_CAP};
pub use unify::{unify_modulo_builtins, SolvedForm, UnifyError};

use crate::signature::{BuiltinOp, Sort};
use crate::terms::{Subst, Term, Var};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Eq(Term, Term),
    /// A builtin term of sort `Bool`.
    Atom(Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Exists(Vec<Var>, Box<Formula>),
    Forall(Vec<Var>, Box<Formula>),
}

#[allow(clippy::should_implement_trait)]
impl Formula {
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn cmp(op: BuiltinOp, a: Term, b: Term) -> Formula {
        Formula::Atom(Term::builtin(op, vec![a, b]))
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn exists(vars: Vec<Var>, body: Formula) -> Formula {
        if vars.is_empty() {
            body
        } else {
            Formula::Exists(vars, Box::new(body))
        }
    }

    pub fn forall(vars: Vec<Var>, body: Formula) -> Formula {
        if vars.is_empty() {
            body
        } else {
            Formula::Forall(vars, Box::new(body))
        }
    }

    /// Conjunction that drops `True` operands and collapses trivial cases.
    pub fn and<I: IntoIterator<Item = Formula>>(parts: I) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(xs) => out.extend(xs),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    /// Disjunction that drops `False` operands and collapses trivial cases.
    pub fn or<I: IntoIterator<Item = Formula>>(parts: I) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(xs) => out.extend(xs),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        let term = |t: &Term, bound: &Vec<Var>, out: &mut BTreeSet<Var>| {
            for v in t.vars() {
                if !bound.contains(&v) {
                    out.insert(v);
                }
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Eq(a, b) => {
                term(a, bound, out);
                term(b, bound, out);
            }
            Formula::Atom(a) => term(a, bound, out),
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_free(bound, out)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(vs, body) | Formula::Forall(vs, body) => {
                let n = bound.len();
                bound.extend(vs.iter().cloned());
                body.collect_free(bound, out);
                bound.truncate(n);
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    /// Every variable occurring in the formula, bound or free.
    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| t.collect_vars(&mut out));
        self.visit_binders(&mut |vs| out.extend(vs.iter().cloned()));
        out
    }

    fn visit_terms(&self, f: &mut dyn FnMut(&Term)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Eq(a, b) => {
                f(a);
                f(b);
            }
            Formula::Atom(a) => f(a),
            Formula::Not(g) => g.visit_terms(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit_terms(f)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.visit_terms(f);
                b.visit_terms(f);
            }
            Formula::Exists(_, g) | Formula::Forall(_, g) => g.visit_terms(f),
        }
    }

    fn visit_binders(&self, f: &mut dyn FnMut(&[Var])) {
        match self {
            Formula::True | Formula::False | Formula::Eq(..) | Formula::Atom(_) => {}
            Formula::Not(g) => g.visit_binders(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit_binders(f)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.visit_binders(f);
                b.visit_binders(f);
            }
            Formula::Exists(vs, g) | Formula::Forall(vs, g) => {
                f(vs);
                g.visit_binders(f);
            }
        }
    }

    /// Whether any constructor symbol or user-sorted variable occurs.
    pub fn mentions_user_terms(&self) -> bool {
        let mut found = false;
        self.visit_terms(&mut |t| found |= !t.is_builtin_term());
        self.visit_binders(&mut |vs| found |= vs.iter().any(|v| !v.sort.is_builtin()));
        found
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit_terms(&mut |t| n += t.size());
        n + self.node_count()
    }

    fn node_count(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Eq(..) | Formula::Atom(_) => 1,
            Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => 1 + g.node_count(),
            Formula::And(gs) | Formula::Or(gs) => 1 + gs.iter().map(Formula::node_count).sum::<usize>(),
            Formula::Implies(a, b) | Formula::Iff(a, b) => 1 + a.node_count() + b.node_count(),
        }
    }

    /// Capture-avoiding substitution of free variables. Binders that would
    /// capture a variable of the substituted terms are renamed to `base#bN`
    /// with the smallest unused `N`.
    pub fn apply(&self, sigma: &Subst) -> Formula {
        if sigma.is_empty() {
            return self.clone();
        }
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Eq(a, b) => Formula::Eq(a.apply(sigma), b.apply(sigma)),
            Formula::Atom(a) => Formula::Atom(a.apply(sigma)),
            Formula::Not(g) => Formula::not(g.apply(sigma)),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| g.apply(sigma)).collect()),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| g.apply(sigma)).collect()),
            Formula::Implies(a, b) => Formula::implies(a.apply(sigma), b.apply(sigma)),
            Formula::Iff(a, b) => Formula::iff(a.apply(sigma), b.apply(sigma)),
            Formula::Exists(vs, body) | Formula::Forall(vs, body) => {
                let mut inner = sigma.clone();
                for v in vs {
                    inner.remove(v);
                }
                let body_free = body.free_vars();
                let relevant: Subst = inner
                    .iter()
                    .filter(|(x, _)| body_free.contains(x))
                    .map(|(x, t)| (x.clone(), t.clone()))
                    .collect();
                let range = relevant.range_vars();
                let mut used: BTreeSet<Var> = body.all_vars();
                used.extend(range.iter().cloned());
                used.extend(relevant.domain().cloned());
                let mut new_vs = Vec::with_capacity(vs.len());
                let mut renamed = relevant;
                for v in vs {
                    if range.contains(v) {
                        let nv = fresh_binder(v, &used);
                        used.insert(nv.clone());
                        renamed.insert(v.clone(), Term::Var(nv.clone()));
                        new_vs.push(nv);
                    } else {
                        new_vs.push(v.clone());
                    }
                }
                let body = body.apply(&renamed);
                match self {
                    Formula::Exists(..) => Formula::Exists(new_vs, Box::new(body)),
                    _ => Formula::Forall(new_vs, Box::new(body)),
                }
            }
        }
    }

    /// Renames every variable, free or bound, through `map`.
    pub fn rename_all(&self, map: &BTreeMap<Var, Var>) -> Formula {
        let rv = |vs: &[Var]| -> Vec<Var> {
            vs.iter()
                .map(|v| map.get(v).cloned().unwrap_or_else(|| v.clone()))
                .collect()
        };
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Eq(a, b) => Formula::Eq(a.rename(map), b.rename(map)),
            Formula::Atom(a) => Formula::Atom(a.rename(map)),
            Formula::Not(g) => Formula::not(g.rename_all(map)),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| g.rename_all(map)).collect()),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| g.rename_all(map)).collect()),
            Formula::Implies(a, b) => Formula::implies(a.rename_all(map), b.rename_all(map)),
            Formula::Iff(a, b) => Formula::iff(a.rename_all(map), b.rename_all(map)),
            Formula::Exists(vs, g) => Formula::Exists(rv(vs), Box::new(g.rename_all(map))),
            Formula::Forall(vs, g) => Formula::Forall(rv(vs), Box::new(g.rename_all(map))),
        }
    }

    /// Top-level conjuncts.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::True => Vec::new(),
            Formula::And(gs) => gs.iter().collect(),
            f => vec![f],
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Formula::Iff(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(gs) if gs.len() >= 2 => 3,
            Formula::And(gs) if gs.len() >= 2 => 4,
            Formula::Or(_) | Formula::And(_) => 6,
            Formula::Not(_) => 5,
            _ => 6,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let own = self.prec();
        let paren = own < min;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Formula::True => f.write_str("true")?,
            Formula::False => f.write_str("false")?,
            Formula::Eq(a, b) => write!(f, "{a} = {b}")?,
            Formula::Atom(t) => write!(f, "{t}")?,
            Formula::Not(g) => {
                if let Formula::Eq(a, b) = &**g {
                    write!(f, "{a} != {b}")?;
                } else {
                    f.write_str("~")?;
                    g.fmt_prec(f, 5)?;
                }
            }
            Formula::And(gs) | Formula::Or(gs) => {
                let (op, empty) = match self {
                    Formula::And(_) => (" /\\ ", "true"),
                    _ => (" \\/ ", "false"),
                };
                match gs.len() {
                    0 => f.write_str(empty)?,
                    1 => gs[0].fmt_prec(f, min)?,
                    _ => {
                        for (i, g) in gs.iter().enumerate() {
                            if i > 0 {
                                f.write_str(op)?;
                            }
                            g.fmt_prec(f, own + 1)?;
                        }
                    }
                }
            }
            Formula::Implies(a, b) => {
                a.fmt_prec(f, 3)?;
                f.write_str(" -> ")?;
                b.fmt_prec(f, 2)?;
            }
            Formula::Iff(a, b) => {
                a.fmt_prec(f, 2)?;
                f.write_str(" <-> ")?;
                b.fmt_prec(f, 2)?;
            }
            Formula::Exists(vs, g) | Formula::Forall(vs, g) => {
                let q = if matches!(self, Formula::Exists(..)) {
                    "exists"
                } else {
                    "forall"
                };
                write!(f, "({q} ")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}:{}", v.name, v.sort)?;
                }
                f.write_str(". ")?;
                g.fmt_prec(f, 0)?;
                f.write_str(")")?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

pub(crate) fn fresh_binder(v: &Var, used: &BTreeSet<Var>) -> Var {
    let taken: BTreeSet<&str> = used.iter().map(|u| &*u.name).collect();
    (0..)
        .map(|n| Var::new(&format!("{}#b{n}", v.base_name()), v.sort.clone()))
        .find(|c| !taken.contains(&*c.name))
        .expect("unbounded candidate names")
}

/// Alpha-equivalence of formulas: equal up to a consistent renaming of
/// bound variables. Free variables must coincide.
pub fn alpha_eq(a: &Formula, b: &Formula) -> bool {
    let mut map = VarBijection::default();
    alpha_formula(a, b, &mut map, false)
}

/// Finds a bijection between the free variables of two constrained terms
/// that makes them alpha-equivalent.
pub fn alpha_match_ct(a: &ConstrainedTerm, b: &ConstrainedTerm) -> Option<BTreeMap<Var, Var>> {
    let mut map = VarBijection::default();
    if !alpha_term(&a.term, &b.term, &mut map, true) {
        return None;
    }
    if !alpha_formula(&a.constraint, &b.constraint, &mut map, true) {
        return None;
    }
    Some(map.fwd)
}

#[derive(Default, Clone)]
struct VarBijection {
    fwd: BTreeMap<Var, Var>,
    bwd: BTreeMap<Var, Var>,
    // Bound pairs, innermost last.
    bound: Vec<(Var, Var)>,
}

impl VarBijection {
    fn pair(&mut self, x: &Var, y: &Var, free_renamable: bool) -> bool {
        if x.sort != y.sort {
            return false;
        }
        let bx = self.bound.iter().rev().find(|(a, _)| a == x);
        let by = self.bound.iter().rev().find(|(_, b)| b == y);
        match (bx, by) {
            (Some((_, b)), Some((a, _))) => return b == y && a == x,
            (None, None) => {}
            _ => return false,
        }
        if !free_renamable {
            return x == y;
        }
        match (self.fwd.get(x), self.bwd.get(y)) {
            (Some(b), Some(a)) => b == y && a == x,
            (None, None) => {
                self.fwd.insert(x.clone(), y.clone());
                self.bwd.insert(y.clone(), x.clone());
                true
            }
            _ => false,
        }
    }
}

fn alpha_term(a: &Term, b: &Term, m: &mut VarBijection, free: bool) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => m.pair(x, y, free),
        (Term::Lit(x), Term::Lit(y)) => x == y,
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| alpha_term(x, y, m, free))
        }
        _ => false,
    }
}

fn alpha_formula(a: &Formula, b: &Formula, m: &mut VarBijection, free: bool) -> bool {
    match (a, b) {
        (Formula::True, Formula::True) | (Formula::False, Formula::False) => true,
        (Formula::Eq(a1, a2), Formula::Eq(b1, b2)) => {
            alpha_term(a1, b1, m, free) && alpha_term(a2, b2, m, free)
        }
        (Formula::Atom(x), Formula::Atom(y)) => alpha_term(x, y, m, free),
        (Formula::Not(x), Formula::Not(y)) => alpha_formula(x, y, m, free),
        (Formula::And(xs), Formula::And(ys)) | (Formula::Or(xs), Formula::Or(ys)) => {
            xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| alpha_formula(x, y, m, free))
        }
        (Formula::Implies(a1, a2), Formula::Implies(b1, b2))
        | (Formula::Iff(a1, a2), Formula::Iff(b1, b2)) => {
            alpha_formula(a1, b1, m, free) && alpha_formula(a2, b2, m, free)
        }
        (Formula::Exists(xs, g), Formula::Exists(ys, h)) | (Formula::Forall(xs, g), Formula::Forall(ys, h)) => {
            if xs.len() != ys.len() || xs.iter().zip(ys).any(|(x, y)| x.sort != y.sort) {
                return false;
            }
            let n = m.bound.len();
            m.bound.extend(xs.iter().cloned().zip(ys.iter().cloned()));
            let ok = alpha_formula(g, h, m, free);
            m.bound.truncate(n);
            ok
        }
        _ => false,
    }
}

/// A term paired with a constraint: the set of its instances under
/// valuations satisfying the constraint.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConstrainedTerm {
    pub term: Term,
    pub constraint: Formula,
}

impl ConstrainedTerm {
    pub fn new(term: Term, constraint: Formula) -> ConstrainedTerm {
        ConstrainedTerm { term, constraint }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut vs = self.term.vars();
        vs.extend(self.constraint.free_vars());
        vs
    }

    pub fn apply(&self, sigma: &Subst) -> ConstrainedTerm {
        ConstrainedTerm {
            term: self.term.apply(sigma),
            constraint: self.constraint.apply(sigma),
        }
    }

    pub fn rename_all(&self, map: &BTreeMap<Var, Var>) -> ConstrainedTerm {
        ConstrainedTerm {
            term: self.term.rename(map),
            constraint: self.constraint.rename_all(map),
        }
    }

    pub fn sort(&self) -> Sort {
        self.term.sort()
    }
}

impl fmt::Display for ConstrainedTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} /\\ ", self.term)?;
        self.constraint.fmt_prec(f, 5)
    }
}

/// The formula `φ → ∃x̃. (t = t' ∧ φ')` with `x̃ = var(t', φ') ∖ var(t, φ)`,
/// valid exactly when every instance of `ct1` is an instance of `ct2` under
/// the same valuation of the shared variables.
pub fn semantic_inclusion_condition(ct1: &ConstrainedTerm, ct2: &ConstrainedTerm) -> Formula {
    let left = ct1.free_vars();
    let extra: Vec<Var> = ct2.free_vars().difference(&left).cloned().collect();
    Formula::implies(
        ct1.constraint.clone(),
        Formula::exists(
            extra,
            Formula::and([
                Formula::eq(ct1.term.clone(), ct2.term.clone()),
                ct2.constraint.clone(),
            ]),
        ),
    )
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::signature::Signature;

    pub(crate) fn cfg() -> Sort {
        Sort::new("Cfg")
    }

    pub(crate) fn comp_sig() -> Signature {
        let mut sig = Signature::new();
        let cfg = sig.add_sort("Cfg").unwrap();
        sig.add_symbol("init", vec![Sort::int()], cfg.clone()).unwrap();
        sig.add_symbol("loop", vec![Sort::int(), Sort::int()], cfg.clone())
            .unwrap();
        sig.add_symbol("comp", vec![], cfg).unwrap();
        sig
    }

    pub(crate) fn v(name: &str) -> Term {
        Term::var(name, Sort::int())
    }

    pub(crate) fn lt(a: Term, b: Term) -> Formula {
        Formula::cmp(BuiltinOp::Lt, a, b)
    }

    pub(crate) fn gt(a: Term, b: Term) -> Formula {
        Formula::cmp(BuiltinOp::Gt, a, b)
    }

    pub(crate) fn md(a: Term, b: Term) -> Term {
        Term::builtin(BuiltinOp::Mod, vec![a, b])
    }

    /// `∃u. 1<u ∧ u<n ∧ n mod u = 0`
    pub(crate) fn psi() -> Formula {
        Formula::exists(
            vec![Var::int("u")],
            Formula::And(vec![
                lt(Term::int(1), v("u")),
                lt(v("u"), v("n")),
                Formula::eq(md(v("n"), v("u")), Term::int(0)),
            ]),
        )
    }

    #[test]
    fn free_vars_examples() {
        assert_eq!(psi().free_vars(), BTreeSet::from([Var::int("n")]));
        let f = Formula::exists(
            vec![Var::int("k")],
            Formula::and([
                gt(v("k"), Term::int(1)),
                Formula::eq(v("n"), Term::mul(v("i"), v("k"))),
            ]),
        );
        assert_eq!(f.free_vars(), BTreeSet::from([Var::int("n"), Var::int("i")]));
    }

    #[test]
    fn substitution_avoids_capture() {
        let sigma = Subst::singleton(Var::int("n"), Term::add(v("u"), Term::int(1)));
        let out = psi().apply(&sigma);
        assert_eq!(out.free_vars(), BTreeSet::from([Var::int("u")]));
        match out {
            Formula::Exists(vs, _) => assert_eq!(&*vs[0].name, "u#b0"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn alpha_equivalence() {
        let renamed = psi().rename_all(&BTreeMap::from([(Var::int("u"), Var::int("w"))]));
        assert!(alpha_eq(&psi(), &renamed));
        let free_renamed = psi().rename_all(&BTreeMap::from([(Var::int("n"), Var::int("m"))]));
        assert!(!alpha_eq(&psi(), &free_renamed));
        let a = ConstrainedTerm::new(v("x"), psi());
        let collapsed = psi().rename_all(&BTreeMap::from([(Var::int("n"), Var::int("x"))]));
        let b = ConstrainedTerm::new(v("x"), collapsed);
        assert!(alpha_match_ct(&a, &b).is_none());
        let c = ConstrainedTerm::new(v("y"), psi().rename_all(&BTreeMap::from([(Var::int("n"), Var::int("m"))])));
        let a2 = ConstrainedTerm::new(v("x"), psi());
        let m = alpha_match_ct(&a2, &c).unwrap();
        assert_eq!(m.get(&Var::int("n")), Some(&Var::int("m")));
    }

    #[test]
    fn inclusion_condition_shapes() {
        let comp = ConstrainedTerm::new(Term::ctor("comp", cfg(), vec![]), Formula::True);
        let f = semantic_inclusion_condition(&comp, &comp);
        assert_eq!(
            f,
            Formula::implies(
                Formula::True,
                Formula::eq(comp.term.clone(), comp.term.clone())
            )
        );
        let y = ConstrainedTerm::new(v("y"), gt(v("y"), Term::int(5)));
        let x = ConstrainedTerm::new(v("x"), gt(v("x"), Term::int(0)));
        match semantic_inclusion_condition(&x, &y) {
            Formula::Implies(_, rhs) => match *rhs {
                Formula::Exists(vs, _) => assert_eq!(vs, vec![Var::int("y")]),
                other => panic!("unexpected {other}"),
            },
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn display_uses_surface_syntax() {
        assert_eq!(
            psi().to_string(),
            "(exists u:Int. 1 < u /\\ u < n /\\ n mod u = 0)"
        );
        let f = Formula::implies(
            Formula::or([lt(v("a"), v("b")), Formula::not(Formula::eq(v("a"), v("b")))]),
            Formula::False,
        );
        assert_eq!(f.to_string(), "a < b \\/ a != b -> false");
    }
}
