//! Unification modulo builtins.
//!
//! Constructor structure is solved syntactically; whatever involves builtin
//! symbols is left as residual equations for the SMT solver.

use thiserror::Error;

use super::Formula;
use crate::signature::Signature;
use crate::terms::{Op, Subst, Term, Var};

/// A most general constructor-level solution: a substitution plus residual
/// builtin equations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolvedForm {
    pub subst: Subst,
    pub residual: Vec<(Term, Term)>,
}

impl SolvedForm {
    /// The solved form as a conjunction of equations.
    pub fn to_formula(&self) -> Formula {
        let bindings = self
            .subst
            .iter()
            .map(|(x, t)| Formula::eq(Term::Var(x.clone()), t.clone()));
        let residual = self
            .residual
            .iter()
            .map(|(a, b)| Formula::eq(a.clone(), b.clone()));
        Formula::and(bindings.chain(residual))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnifyError {
    #[error("terms {0} and {1} have no common supersort")]
    SortMismatch(Term, Term),
    #[error("cannot bind {var} to {term}: its sort is not below the variable's")]
    SortRestriction { var: Var, term: Term },
}

/// Unifies two terms modulo builtins. The result is empty on a clash and
/// otherwise holds one solved form equivalent to `t1 = t2`.
pub fn unify_modulo_builtins(
    sig: &Signature,
    t1: &Term,
    t2: &Term,
) -> Result<Vec<SolvedForm>, UnifyError> {
    let (s1, s2) = (sort_of(sig, t1), sort_of(sig, t2));
    if !sig.connected(&s1, &s2) {
        return Err(UnifyError::SortMismatch(t1.clone(), t2.clone()));
    }
    let mut subst = Subst::new();
    let mut residual = Vec::new();
    let mut work = vec![(t1.clone(), t2.clone())];
    while let Some((a, b)) = work.pop() {
        let a = a.apply(&subst);
        let b = b.apply(&subst);
        if a == b {
            continue;
        }
        match (&a, &b) {
            (Term::Var(x), _) if !x.sort.is_builtin() => {
                if !bind(sig, x, &b, &mut subst)? {
                    return Ok(Vec::new());
                }
            }
            (_, Term::Var(y)) if !y.sort.is_builtin() => {
                if !bind(sig, y, &a, &mut subst)? {
                    return Ok(Vec::new());
                }
            }
            (Term::App(Op::Ctor(f), xs), Term::App(Op::Ctor(g), ys)) => {
                if f.name != g.name || xs.len() != ys.len() {
                    return Ok(Vec::new());
                }
                work.extend(xs.iter().cloned().zip(ys.iter().cloned()).rev());
            }
            (Term::Lit(x), Term::Lit(y)) => {
                if x != y {
                    return Ok(Vec::new());
                }
            }
            _ if a.is_builtin_headed() && b.is_builtin_headed() => residual.push((a, b)),
            // One side is a constructor application, the other builtin.
            _ => return Ok(Vec::new()),
        }
    }
    let residual = residual
        .into_iter()
        .map(|(a, b)| (a.apply(&subst), b.apply(&subst)))
        .collect();
    Ok(vec![SolvedForm { subst, residual }])
}

fn sort_of(sig: &Signature, t: &Term) -> crate::signature::Sort {
    sig.least_sort(t).unwrap_or_else(|_| t.sort())
}

// Returns Ok(false) on an occurs-check failure.
fn bind(sig: &Signature, x: &Var, t: &Term, subst: &mut Subst) -> Result<bool, UnifyError> {
    if t.contains_var(x) {
        return Ok(false);
    }
    let ts = sort_of(sig, t);
    if !sig.leq(&ts, &x.sort) {
        if let Term::Var(y) = t {
            if !y.sort.is_builtin() && sig.leq(&x.sort, &y.sort) {
                return bind(sig, y, &Term::Var(x.clone()), subst);
            }
        }
        if !sig.connected(&ts, &x.sort) {
            return Ok(false);
        }
        return Err(UnifyError::SortRestriction {
            var: x.clone(),
            term: t.clone(),
        });
    }
    let single = Subst::singleton(x.clone(), t.clone());
    *subst = single.compose(subst);
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::tests::{cfg, comp_sig, v};
    use crate::signature::Sort;
    use crate::terms::Value;
    use std::collections::{BTreeMap, BTreeSet};

    fn init(a: Term) -> Term {
        Term::ctor("init", cfg(), vec![a])
    }

    fn looop(a: Term, b: Term) -> Term {
        Term::ctor("loop", cfg(), vec![a, b])
    }

    fn comp() -> Term {
        Term::ctor("comp", cfg(), vec![])
    }

    #[test]
    fn init_against_renamed_init() {
        let sig = comp_sig();
        let got = unify_modulo_builtins(&sig, &init(v("n'")), &init(v("n"))).unwrap();
        assert_eq!(got.len(), 1);
        assert!(got[0].subst.is_empty());
        assert_eq!(got[0].residual, vec![(v("n'"), v("n"))]);
    }

    #[test]
    fn loop_against_product_pattern() {
        let sig = comp_sig();
        let pat = looop(Term::mul(v("i'"), v("k'")), v("i'"));
        let got = unify_modulo_builtins(&sig, &looop(v("n"), Term::int(2)), &pat).unwrap();
        assert_eq!(
            got[0].residual,
            vec![
                (v("n"), Term::mul(v("i'"), v("k'"))),
                (Term::int(2), v("i'"))
            ]
        );
    }

    #[test]
    fn distinct_constructors_clash() {
        let sig = comp_sig();
        assert!(unify_modulo_builtins(&sig, &comp(), &looop(v("n"), v("i")))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn user_variables_bind_with_occurs_check() {
        let mut sig = Signature::new();
        let l = sig.add_sort("List").unwrap();
        sig.add_symbol("nil", vec![], l.clone()).unwrap();
        sig.add_symbol("cons", vec![Sort::int(), l.clone()], l.clone())
            .unwrap();
        let xs = Term::var("xs", l.clone());
        let cons = |h: Term, t: Term| Term::ctor("cons", l.clone(), vec![h, t]);
        let got = unify_modulo_builtins(&sig, &xs, &cons(v("h"), Term::ctor("nil", l.clone(), vec![]))).unwrap();
        assert_eq!(got[0].subst.len(), 1);
        let occurs = unify_modulo_builtins(&sig, &xs, &cons(v("h"), xs.clone())).unwrap();
        assert!(occurs.is_empty());
        let err = unify_modulo_builtins(&sig, &xs, &v("h"));
        assert!(matches!(err, Err(UnifyError::SortMismatch(..))));
    }

    // Ground evaluation of an equation between terms over the compositeness
    // signature: compare the normal forms with builtin subterms evaluated.
    fn eval(t: &Term, val: &BTreeMap<Var, i64>) -> Option<Term> {
        match t {
            Term::Var(x) => Some(Term::int(*val.get(x)?)),
            Term::Lit(_) => Some(t.clone()),
            Term::App(Op::Builtin(op), args) => {
                let vals: Option<Vec<Value>> = args
                    .iter()
                    .map(|a| match eval(a, val)? {
                        Term::Lit(v) => Some(v),
                        _ => None,
                    })
                    .collect();
                crate::terms::eval_builtin(*op, &vals?).map(Term::Lit)
            }
            Term::App(op, args) => Some(Term::App(
                op.clone(),
                args.iter().map(|a| eval(a, val)).collect::<Option<Vec<_>>>()?.into(),
            )),
        }
    }

    fn holds(f: &[(Term, Term)], val: &BTreeMap<Var, i64>) -> bool {
        f.iter().all(|(a, b)| eval(a, val).is_some() && eval(a, val) == eval(b, val))
    }

    fn gen_terms() -> Vec<Term> {
        let leaves = vec![v("x"), v("y"), Term::int(1), Term::int(-1)];
        let mut ints = leaves.clone();
        ints.push(Term::add(v("x"), Term::int(1)));
        ints.push(Term::mul(v("x"), v("y")));
        let mut out = vec![comp()];
        for a in &ints {
            out.push(init(a.clone()));
            for b in &leaves {
                out.push(looop(a.clone(), b.clone()));
            }
        }
        out
    }

    #[test]
    fn solved_forms_agree_with_ground_equality() {
        let sig = comp_sig();
        let b = 3i64;
        let vars = [Var::int("x"), Var::int("y")];
        let terms = gen_terms();
        for t1 in &terms {
            for t2 in &terms {
                let t2 = t2.rename(&BTreeMap::from([(Var::int("y"), Var::int("z"))]));
                let sfs = unify_modulo_builtins(&sig, t1, &t2).unwrap();
                let mut all = vars.to_vec();
                all.push(Var::int("z"));
                let all: Vec<Var> = all.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
                for idx in 0..(2 * b + 1).pow(all.len() as u32) {
                    let mut rest = idx;
                    let val: BTreeMap<Var, i64> = all
                        .iter()
                        .map(|x| {
                            let value = rest % (2 * b + 1) - b;
                            rest /= 2 * b + 1;
                            (x.clone(), value)
                        })
                        .collect();
                    let direct = holds(&[(t1.clone(), t2.clone())], &val);
                    let via = sfs.iter().any(|sf| {
                        let eqs: Vec<(Term, Term)> = sf
                            .subst
                            .iter()
                            .map(|(x, t)| (Term::Var(x.clone()), t.clone()))
                            .chain(sf.residual.iter().cloned())
                            .collect();
                        holds(&eqs, &val)
                    });
                    assert_eq!(direct, via, "{t1} = {t2} under {val:?}");
                }
            }
        }
    }
}
