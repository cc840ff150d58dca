//! Ground evaluation of terms and formulas over a bounded domain, and
//! enumeration of the valuations satisfying a constraint.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::Zero;

use super::{Domain, OracleError};
use crate::constraints::{ConstrainedTerm, Formula};
use crate::signature::{BuiltinOp, Signature, Sort};
use crate::terms::{eval_builtin, Op, Term, Value, Var};

pub type Env = BTreeMap<Var, Term>;

/// Ground terms per finitary user sort are capped at this many.
pub const MAX_SORT_INSTANCES: usize = 100_000;

/// Builtin application with the oracle's total division:
/// `x div 0 = 0` and `x mod 0 = x`.
pub fn apply_builtin(op: BuiltinOp, args: &[Value]) -> Option<Value> {
    match (op, args) {
        (BuiltinOp::Div, [Value::Int(_), Value::Int(d)]) if d.is_zero() => Some(Value::Int(BigInt::zero())),
        (BuiltinOp::Mod, [Value::Int(x), Value::Int(d)]) if d.is_zero() => Some(Value::Int(x.clone())),
        _ => eval_builtin(op, args),
    }
}

/// Instantiates `t` by `env` and evaluates every builtin subterm.
pub fn normalize(t: &Term, env: &Env) -> Result<Term, OracleError> {
    match t {
        Term::Var(x) => env.get(x).cloned().ok_or_else(|| OracleError::Unbound(x.to_string())),
        Term::Lit(_) => Ok(t.clone()),
        Term::App(Op::Ctor(c), args) => {
            let args: Vec<Term> = args.iter().map(|a| normalize(a, env)).collect::<Result<_, _>>()?;
            Ok(Term::App(Op::Ctor(c.clone()), args.into()))
        }
        Term::App(Op::Builtin(op), args) => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args.iter() {
                match normalize(a, env)? {
                    Term::Lit(v) => vals.push(v),
                    other => return Err(OracleError::IllSorted(other.to_string())),
                }
            }
            apply_builtin(*op, &vals)
                .map(Term::Lit)
                .ok_or_else(|| OracleError::IllSorted(t.to_string()))
        }
    }
}

/// Candidate values of a sort: the domain for `Int`, both truth values,
/// and all ground constructor terms of a finitary user sort.
pub fn sort_values(sig: &Signature, s: &Sort, dom: &Domain) -> Result<Vec<Term>, OracleError> {
    if *s == Sort::int() {
        return Ok(dom.ints().map(Term::int).collect());
    }
    if *s == Sort::bool() {
        return Ok(vec![Term::boolean(false), Term::boolean(true)]);
    }
    if !sig.is_finitary(s) {
        return Err(OracleError::UnboundedSort(s.to_string()));
    }
    let mut out = Vec::new();
    for d in sig.symbols().iter().filter(|d| sig.leq(&d.result, s)) {
        let mut partial: Vec<Vec<Term>> = vec![Vec::new()];
        for a in &d.args {
            let vals = sort_values(sig, a, dom)?;
            let mut next = Vec::with_capacity(partial.len() * vals.len());
            for p in &partial {
                for v in &vals {
                    let mut q = p.clone();
                    q.push(v.clone());
                    next.push(q);
                }
            }
            if next.len() > MAX_SORT_INSTANCES {
                return Err(OracleError::TooLarge(s.to_string()));
            }
            partial = next;
        }
        out.extend(partial.into_iter().map(|args| Term::ctor(&d.name, d.result.clone(), args)));
        if out.len() > MAX_SORT_INSTANCES {
            return Err(OracleError::TooLarge(s.to_string()));
        }
    }
    Ok(out)
}

/// Evaluator for closed (under `env`) formulas; quantifiers range over
/// [`sort_values`].
pub struct Evaluator<'a> {
    pub sig: &'a Signature,
    pub dom: Domain,
}

impl Evaluator<'_> {
    pub fn formula(&self, f: &Formula, env: &mut Env) -> Result<bool, OracleError> {
        Ok(match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Eq(a, b) => normalize(a, env)? == normalize(b, env)?,
            Formula::Atom(t) => match normalize(t, env)? {
                Term::Lit(Value::Bool(b)) => b,
                other => return Err(OracleError::IllSorted(other.to_string())),
            },
            Formula::Not(g) => !self.formula(g, env)?,
            Formula::And(gs) => {
                for g in gs {
                    if !self.formula(g, env)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Or(gs) => {
                for g in gs {
                    if self.formula(g, env)? {
                        return Ok(true);
                    }
                }
                false
            }
            Formula::Implies(a, b) => !self.formula(a, env)? || self.formula(b, env)?,
            Formula::Iff(a, b) => self.formula(a, env)? == self.formula(b, env)?,
            Formula::Exists(vs, body) => self.quantified(vs, body, env)?,
            Formula::Forall(vs, body) => !self.quantified(vs, &Formula::not((**body).clone()), env)?,
        })
    }

    /// Whether some assignment of `vs` makes `body` true.
    fn quantified(&self, vs: &[Var], body: &Formula, env: &mut Env) -> Result<bool, OracleError> {
        let Some((x, rest)) = vs.split_first() else {
            return self.formula(body, env);
        };
        let values = sort_values(self.sig, &x.sort, &self.dom).map_err(|e| match e {
            OracleError::UnboundedSort(s) => OracleError::UnsupportedQuantifier(s),
            e => e,
        })?;
        let saved = env.remove(x);
        let mut found = false;
        for v in values {
            env.insert(x.clone(), v);
            if self.quantified(rest, body, env)? {
                found = true;
                break;
            }
        }
        env.remove(x);
        if let Some(old) = saved {
            env.insert(x.clone(), old);
        }
        Ok(found)
    }

    /// Calls `emit` with every extension of `env` to `vars` that satisfies
    /// `f`. Variables fixed by a top-level equation `x = e` take the value
    /// of `e`; with `strict` that value must lie in the domain, otherwise
    /// it is unrestricted. The remaining variables range over the domain.
    pub fn solutions(
        &self,
        f: &Formula,
        vars: &[Var],
        env: &Env,
        strict: bool,
        emit: &mut dyn FnMut(&Env),
    ) -> Result<(), OracleError> {
        let conjuncts: Vec<(&Formula, BTreeSet<Var>)> = f.conjuncts().into_iter().map(|c| (c, c.free_vars())).collect();
        let mut env = env.clone();
        let pending: Vec<Var> = vars.iter().filter(|v| !env.contains_key(*v)).cloned().collect();
        let mut checked = vec![false; conjuncts.len()];
        self.solve(&conjuncts, &mut checked, &pending, &mut env, strict, emit)
    }

    fn solve(
        &self,
        conjuncts: &[(&Formula, BTreeSet<Var>)],
        checked: &mut [bool],
        pending: &[Var],
        env: &mut Env,
        strict: bool,
        emit: &mut dyn FnMut(&Env),
    ) -> Result<(), OracleError> {
        let mut newly = Vec::new();
        for (i, (c, fv)) in conjuncts.iter().enumerate() {
            if !checked[i] && fv.iter().all(|v| env.contains_key(v)) {
                if !self.formula(c, env)? {
                    for j in newly {
                        checked[j] = false;
                    }
                    return Ok(());
                }
                checked[i] = true;
                newly.push(i);
            }
        }
        let result = self.branch(conjuncts, checked, pending, env, strict, emit);
        for j in newly {
            checked[j] = false;
        }
        result
    }

    fn branch(
        &self,
        conjuncts: &[(&Formula, BTreeSet<Var>)],
        checked: &mut [bool],
        pending: &[Var],
        env: &mut Env,
        strict: bool,
        emit: &mut dyn FnMut(&Env),
    ) -> Result<(), OracleError> {
        let open: Vec<&Var> = pending.iter().filter(|v| !env.contains_key(*v)).collect();
        if open.is_empty() {
            emit(env);
            return Ok(());
        }
        for (c, _) in conjuncts {
            let Formula::Eq(a, b) = c else { continue };
            for (lhs, rhs) in [(a, b), (b, a)] {
                let Term::Var(x) = lhs else { continue };
                if env.contains_key(x) || rhs.contains_var(x) || !rhs.vars().iter().all(|v| env.contains_key(v)) {
                    continue;
                }
                let value = normalize(rhs, env)?;
                if strict && !self.dom.contains(&value) {
                    return Ok(());
                }
                env.insert(x.clone(), value);
                let r = self.solve(conjuncts, checked, pending, env, strict, emit);
                env.remove(x);
                return r;
            }
        }
        let x = open[0].clone();
        for v in sort_values(self.sig, &x.sort, &self.dom)? {
            env.insert(x.clone(), v);
            self.solve(conjuncts, checked, pending, env, strict, emit)?;
        }
        env.remove(&x);
        Ok(())
    }

    /// Plain enumeration of every domain valuation of `vars`; the reference
    /// for [`Evaluator::solutions`] in strict mode.
    pub fn brute_solutions(
        &self,
        f: &Formula,
        vars: &[Var],
        env: &Env,
        emit: &mut dyn FnMut(&Env),
    ) -> Result<(), OracleError> {
        let mut env = env.clone();
        self.brute(f, vars, &mut env, emit)
    }

    fn brute(&self, f: &Formula, vars: &[Var], env: &mut Env, emit: &mut dyn FnMut(&Env)) -> Result<(), OracleError> {
        let Some((x, rest)) = vars.split_first() else {
            if self.formula(f, env)? {
                emit(env);
            }
            return Ok(());
        };
        if env.contains_key(x) {
            return self.brute(f, rest, env, emit);
        }
        for v in sort_values(self.sig, &x.sort, &self.dom)? {
            env.insert(x.clone(), v);
            self.brute(f, rest, env, emit)?;
        }
        env.remove(x);
        Ok(())
    }

    /// `{α(t) | α ⊨ φ}` with α ranging over domain valuations that extend
    /// `fixed`.
    pub fn instances_with(&self, ct: &ConstrainedTerm, fixed: &Env) -> Result<BTreeSet<Term>, OracleError> {
        let vars: Vec<Var> = ct.free_vars().into_iter().collect();
        let mut out = BTreeSet::new();
        let mut err = None;
        self.solutions(&ct.constraint, &vars, fixed, true, &mut |env| match normalize(&ct.term, env) {
            Ok(t) => {
                out.insert(t);
            }
            Err(e) => err = Some(e),
        })?;
        match err {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }

    /// Whether `g` is an instance of `ct` by a valuation extending `fixed`.
    /// Variables matched against `g` may take any value; the others range
    /// over the domain.
    pub fn is_instance(&self, ct: &ConstrainedTerm, g: &Term, fixed: &Env) -> Result<bool, OracleError> {
        let mut env = fixed.clone();
        let mut eqs = Vec::new();
        if !match_ground(&ct.term, g, &mut env, &mut eqs) {
            return Ok(false);
        }
        let f = Formula::and(
            eqs.into_iter()
                .map(|(p, v)| Formula::eq(p, v))
                .chain(std::iter::once(ct.constraint.clone())),
        );
        let vars: Vec<Var> = f.free_vars().into_iter().collect();
        let mut found = false;
        self.solutions(&f, &vars, &env, false, &mut |_| found = true)?;
        Ok(found)
    }
}

/// Matches `pattern` against the ground normal form `subject`, binding
/// variables at variable positions. Builtin-headed pattern subterms are
/// returned as equations to be solved.
pub fn match_ground(pattern: &Term, subject: &Term, env: &mut Env, eqs: &mut Vec<(Term, Term)>) -> bool {
    match pattern {
        Term::Var(x) => match env.get(x) {
            Some(bound) => bound == subject,
            None => {
                env.insert(x.clone(), subject.clone());
                true
            }
        },
        Term::Lit(_) => pattern == subject,
        Term::App(Op::Ctor(c), args) => match subject {
            Term::App(Op::Ctor(d), sargs) if c.name == d.name && args.len() == sargs.len() => args
                .iter()
                .zip(sargs.iter())
                .all(|(p, s)| match_ground(p, s, env, eqs)),
            _ => false,
        },
        Term::App(Op::Builtin(_), _) => {
            eqs.push((pattern.clone(), subject.clone()));
            true
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::tests::{comp_sig, lt, md, psi, v};
    use proptest::prelude::*;

    fn ev(sig: &Signature, b: u32) -> Evaluator<'_> {
        Evaluator { sig, dom: Domain::new(b) }
    }

    #[test]
    fn division_by_zero_convention() {
        let seven = Value::Int(7.into());
        let zero = Value::Int(0.into());
        assert_eq!(apply_builtin(BuiltinOp::Div, &[seven.clone(), zero.clone()]), Some(zero.clone()));
        assert_eq!(apply_builtin(BuiltinOp::Mod, &[seven.clone(), zero]), Some(seven));
    }

    #[test]
    fn composite_witnesses() {
        let sig = comp_sig();
        let e = ev(&sig, 12);
        let mut env = Env::new();
        let mut composites = Vec::new();
        for n in -12..=12 {
            env.insert(Var::int("n"), Term::int(n));
            if e.formula(&psi(), &mut env).unwrap() {
                composites.push(n);
            }
        }
        assert_eq!(composites, vec![4, 6, 8, 9, 10, 12]);
    }

    #[test]
    fn user_sort_quantifier_is_rejected_when_unbounded() {
        let mut sig = comp_sig();
        let list = sig.add_sort("List").unwrap();
        sig.add_symbol("nil", vec![], list.clone()).unwrap();
        sig.add_symbol("cons", vec![Sort::int(), list.clone()], list.clone()).unwrap();
        let e = ev(&sig, 2);
        let f = Formula::exists(vec![Var::new("l", list.clone())], Formula::True);
        assert!(matches!(e.formula(&f, &mut Env::new()), Err(OracleError::UnsupportedQuantifier(_))));
        let cfg = Sort::new("Cfg");
        assert_eq!(sort_values(&sig, &cfg, &Domain::new(1)).unwrap().len(), 3 + 9 + 1);
    }

    #[test]
    fn matching_collects_builtin_patterns() {
        let cfg = Sort::new("Cfg");
        let p = Term::ctor("loop", cfg.clone(), vec![Term::mul(v("i"), v("k")), v("i")]);
        let s = Term::ctor("loop", cfg, vec![Term::int(4), Term::int(2)]);
        let mut env = Env::new();
        let mut eqs = Vec::new();
        assert!(match_ground(&p, &s, &mut env, &mut eqs));
        assert_eq!(env.get(&Var::int("i")), Some(&Term::int(2)));
        assert_eq!(eqs, vec![(Term::mul(v("i"), v("k")), Term::int(4))]);
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let atom = prop_oneof![
            (0usize..3, -3i64..=3).prop_map(|(x, c)| Formula::eq(v(["x", "y", "z"][x]), Term::int(c))),
            (0usize..3, 0usize..3).prop_map(|(x, y)| lt(v(["x", "y", "z"][x]), v(["x", "y", "z"][y]))),
            (0usize..3, 0usize..3, -2i64..=2)
                .prop_map(|(x, y, c)| Formula::eq(v(["x", "y", "z"][x]), Term::add(v(["x", "y", "z"][y]), Term::int(c)))),
            (0usize..3, 1i64..=3).prop_map(|(x, c)| Formula::eq(md(v(["x", "y", "z"][x]), Term::int(c)), Term::int(0))),
        ];
        atom.prop_recursive(3, 12, 3, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 1..4).prop_map(Formula::And),
                prop::collection::vec(inner.clone(), 1..3).prop_map(Formula::Or),
                inner.clone().prop_map(Formula::not),
                inner.prop_map(|f| Formula::exists(vec![Var::int("z")], f)),
            ]
        })
    }

    proptest! {
        #[test]
        fn smart_enumeration_matches_brute_force(f in arb_formula()) {
            let sig = comp_sig();
            let e = ev(&sig, 3);
            let vars = vec![Var::int("x"), Var::int("y"), Var::int("z")];
            let mut a = BTreeSet::new();
            e.solutions(&f, &vars, &Env::new(), true, &mut |env| { a.insert(env.clone()); }).unwrap();
            let mut b = BTreeSet::new();
            e.brute_solutions(&f, &vars, &Env::new(), &mut |env| { b.insert(env.clone()); }).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
