//! Terms, positions, substitutions and fresh renaming.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::signature::{BuiltinOp, Signature, Sort};

/// A sorted variable. Identity is the pair (name, sort).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: Arc<str>,
    pub sort: Sort,
}

impl Var {
    pub fn new(name: &str, sort: Sort) -> Var {
        Var {
            name: Arc::from(name),
            sort,
        }
    }

    pub fn int(name: &str) -> Var {
        Var::new(name, Sort::int())
    }

    /// Name with any fresh-renaming suffix removed.
    pub fn base_name(&self) -> &str {
        self.name.split('#').next().unwrap_or(&self.name)
    }

    pub fn is_fresh(&self) -> bool {
        self.name.contains('#')
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name, self.sort)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Element of a builtin carrier.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(BigInt),
    Bool(bool),
}

impl Value {
    pub fn sort(&self) -> Sort {
        match self {
            Value::Int(_) => Sort::int(),
            Value::Bool(_) => Sort::bool(),
        }
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Value::Int(n) => Some(n),
            Value::Bool(_) => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            Value::Int(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// Euclidean division as in SMT-LIB: `0 <= a mod b < |b|`.
/// Returns `None` when the divisor is zero.
pub fn euclid_div_mod(a: &BigInt, b: &BigInt) -> Option<(BigInt, BigInt)> {
    if b.is_zero() {
        return None;
    }
    let r = a.mod_floor(&b.abs());
    let q = (a - &r) / b;
    Some((q, r))
}

/// Evaluates a builtin operator on values. `None` on a sort mismatch or a
/// zero divisor, whose result is unspecified in the builtin model.
pub fn eval_builtin(op: BuiltinOp, args: &[Value]) -> Option<Value> {
    let int = |i: usize| args.get(i).and_then(Value::as_int);
    let boolean = |i: usize| args.get(i).and_then(Value::as_bool);
    Some(match op {
        BuiltinOp::Add => Value::Int(int(0)? + int(1)?),
        BuiltinOp::Sub => Value::Int(int(0)? - int(1)?),
        BuiltinOp::Mul => Value::Int(int(0)? * int(1)?),
        BuiltinOp::Div => Value::Int(euclid_div_mod(int(0)?, int(1)?)?.0),
        BuiltinOp::Mod => Value::Int(euclid_div_mod(int(0)?, int(1)?)?.1),
        BuiltinOp::Neg => Value::Int(-(int(0)?.clone())),
        BuiltinOp::Lt => Value::Bool(int(0)? < int(1)?),
        BuiltinOp::Le => Value::Bool(int(0)? <= int(1)?),
        BuiltinOp::Gt => Value::Bool(int(0)? > int(1)?),
        BuiltinOp::Ge => Value::Bool(int(0)? >= int(1)?),
        BuiltinOp::And => Value::Bool(boolean(0)? && boolean(1)?),
        BuiltinOp::Or => Value::Bool(boolean(0)? || boolean(1)?),
        BuiltinOp::Not => Value::Bool(!boolean(0)?),
    })
}

/// A constructor symbol together with the result sort of the overload it
/// was resolved to.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CtorSym {
    pub name: Arc<str>,
    pub sort: Sort,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Builtin(BuiltinOp),
    Ctor(CtorSym),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    Lit(Value),
    App(Op, Arc<[Term]>),
}

/// Path of child indices from the root; empty is the top position.
pub type Position = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("invalid position {0:?}")]
    InvalidPosition(Position),
    #[error("sort mismatch: expected {expected}, found {found}")]
    SortMismatch { expected: Sort, found: Sort },
}

#[allow(clippy::should_implement_trait)]
impl Term {
    pub fn var(name: &str, sort: Sort) -> Term {
        Term::Var(Var::new(name, sort))
    }

    pub fn int<N: Into<BigInt>>(n: N) -> Term {
        Term::Lit(Value::Int(n.into()))
    }

    pub fn boolean(b: bool) -> Term {
        Term::Lit(Value::Bool(b))
    }

    pub fn ctor(name: &str, sort: Sort, args: Vec<Term>) -> Term {
        Term::App(
            Op::Ctor(CtorSym {
                name: Arc::from(name),
                sort,
            }),
            args.into(),
        )
    }

    pub fn builtin(op: BuiltinOp, args: Vec<Term>) -> Term {
        Term::App(Op::Builtin(op), args.into())
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::builtin(BuiltinOp::Add, vec![a, b])
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::builtin(BuiltinOp::Sub, vec![a, b])
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::builtin(BuiltinOp::Mul, vec![a, b])
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App(_, args) => args,
            _ => &[],
        }
    }

    /// Sort recorded in the term itself: the variable's sort, the literal's
    /// sort, or the result sort of the head symbol.
    pub fn sort(&self) -> Sort {
        match self {
            Term::Var(v) => v.sort.clone(),
            Term::Lit(v) => v.sort(),
            Term::App(Op::Builtin(op), _) => op.result_sort(),
            Term::App(Op::Ctor(c), _) => c.sort.clone(),
        }
    }

    pub fn is_ctor_app(&self) -> bool {
        matches!(self, Term::App(Op::Ctor(_), _))
    }

    /// True when the head is a literal, a builtin operator, or a variable of
    /// builtin sort.
    pub fn is_builtin_headed(&self) -> bool {
        match self {
            Term::Var(v) => v.sort.is_builtin(),
            Term::Lit(_) => true,
            Term::App(Op::Builtin(_), _) => true,
            Term::App(Op::Ctor(_), _) => false,
        }
    }

    /// True when the term has no constructor and no user-sorted variable.
    pub fn is_builtin_term(&self) -> bool {
        match self {
            Term::Var(v) => v.sort.is_builtin(),
            Term::Lit(_) => true,
            Term::App(Op::Builtin(_), args) => args.iter().all(Term::is_builtin_term),
            Term::App(Op::Ctor(_), _) => false,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Lit(_) => true,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Lit(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn contains_var(&self, x: &Var) -> bool {
        match self {
            Term::Var(v) => v == x,
            Term::Lit(_) => false,
            Term::App(_, args) => args.iter().any(|a| a.contains_var(x)),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.args().iter().map(Term::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.args().iter().map(Term::depth).max().unwrap_or(0)
    }

    pub fn subterm_at(&self, p: &[usize]) -> Option<&Term> {
        match p.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.args().get(i)?.subterm_at(rest),
        }
    }

    /// Replaces the subterm at `p` by `s`. The sort of `s` must be below the
    /// sort expected at `p`.
    pub fn replace_at(&self, sig: &Signature, p: &[usize], s: Term) -> Result<Term, TermError> {
        let old = self
            .subterm_at(p)
            .ok_or_else(|| TermError::InvalidPosition(p.to_vec()))?;
        let expected = match p.split_last() {
            None => None,
            Some((&i, parent)) => {
                let parent = self.subterm_at(parent).expect("prefix of a valid position");
                match parent {
                    Term::App(Op::Builtin(op), _) => Some(op.arg_sort()),
                    Term::App(Op::Ctor(c), args) => {
                        let sorts: Vec<Sort> = args.iter().map(Term::sort).collect();
                        sig.resolve(&c.name, &sorts).map(|d| d.args[i].clone())
                    }
                    _ => None,
                }
            }
        };
        let expected = expected.unwrap_or_else(|| old.sort());
        let found = sig.least_sort(&s).unwrap_or_else(|_| s.sort());
        if !sig.leq(&found, &expected) {
            return Err(TermError::SortMismatch { expected, found });
        }
        Ok(self.replace_unchecked(p, s))
    }

    /// Replaces the subterm at a position known to be valid, without a sort
    /// check.
    pub fn replace_unchecked(&self, p: &[usize], s: Term) -> Term {
        match p.split_first() {
            None => s,
            Some((&i, rest)) => match self {
                Term::App(op, args) => {
                    let mut new: Vec<Term> = args.to_vec();
                    new[i] = new[i].replace_unchecked(rest, s);
                    Term::App(op.clone(), new.into())
                }
                _ => panic!("replace_unchecked: invalid position"),
            },
        }
    }

    /// Positions of applications and literals in preorder.
    pub fn non_variable_positions(&self) -> Vec<Position> {
        fn walk(t: &Term, path: &mut Position, out: &mut Vec<Position>) {
            match t {
                Term::Var(_) => {}
                Term::Lit(_) => out.push(path.clone()),
                Term::App(_, args) => {
                    out.push(path.clone());
                    for (i, a) in args.iter().enumerate() {
                        path.push(i);
                        walk(a, path, out);
                        path.pop();
                    }
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn apply(&self, sigma: &Subst) -> Term {
        if sigma.is_empty() {
            return self.clone();
        }
        match self {
            Term::Var(v) => sigma.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Lit(_) => self.clone(),
            Term::App(op, args) => {
                Term::App(op.clone(), args.iter().map(|a| a.apply(sigma)).collect())
            }
        }
    }

    /// Syntactic matching: finds `σ` with `σ(self) = subject`.
    pub fn match_against(&self, subject: &Term) -> Option<Subst> {
        let mut sigma = Subst::new();
        self.match_into(subject, &mut sigma).then_some(sigma)
    }

    fn match_into(&self, subject: &Term, sigma: &mut Subst) -> bool {
        match (self, subject) {
            (Term::Var(v), _) => match sigma.get(v) {
                Some(bound) => bound == subject,
                None => {
                    sigma.insert(v.clone(), subject.clone());
                    true
                }
            },
            (Term::Lit(a), Term::Lit(b)) => a == b,
            (Term::App(f, xs), Term::App(g, ys)) => {
                f == g
                    && xs.len() == ys.len()
                    && xs.iter().zip(ys.iter()).all(|(x, y)| x.match_into(y, sigma))
            }
            _ => false,
        }
    }

    /// Renames variables through `map`, leaving others untouched.
    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Term {
        match self {
            Term::Var(v) => Term::Var(map.get(v).cloned().unwrap_or_else(|| v.clone())),
            Term::Lit(_) => self.clone(),
            Term::App(op, args) => Term::App(op.clone(), args.iter().map(|a| a.rename(map)).collect()),
        }
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Term::Lit(v) => v.as_int(),
            _ => None,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Lit(v) => write!(f, "{v}"),
            Term::App(Op::Ctor(c), args) => {
                f.write_str(&c.name)?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        a.fmt_prec(f, 0)?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
            Term::App(Op::Builtin(op), args) => {
                let (own, lhs, rhs) = match op {
                    BuiltinOp::Lt | BuiltinOp::Le | BuiltinOp::Gt | BuiltinOp::Ge => (1, 2, 2),
                    BuiltinOp::Add | BuiltinOp::Sub => (2, 2, 3),
                    BuiltinOp::Mul | BuiltinOp::Div | BuiltinOp::Mod => (3, 3, 4),
                    BuiltinOp::Neg => {
                        f.write_str("-(")?;
                        args[0].fmt_prec(f, 0)?;
                        return f.write_str(")");
                    }
                    BuiltinOp::And | BuiltinOp::Or | BuiltinOp::Not => {
                        write!(f, "{}(", op.name())?;
                        for (i, a) in args.iter().enumerate() {
                            if i > 0 {
                                f.write_str(", ")?;
                            }
                            a.fmt_prec(f, 0)?;
                        }
                        return f.write_str(")");
                    }
                };
                if own < prec {
                    f.write_str("(")?;
                }
                args[0].fmt_prec(f, lhs)?;
                write!(f, " {} ", op.name())?;
                args[1].fmt_prec(f, rhs)?;
                if own < prec {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl From<Var> for Term {
    fn from(v: Var) -> Term {
        Term::Var(v)
    }
}

/// A finite substitution; identity outside its domain.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subst(BTreeMap<Var, Term>);

impl Subst {
    pub fn new() -> Subst {
        Subst(BTreeMap::new())
    }

    pub fn singleton(x: Var, t: Term) -> Subst {
        Subst(BTreeMap::from([(x, t)]))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, x: &Var) -> Option<&Term> {
        self.0.get(x)
    }

    pub fn insert(&mut self, x: Var, t: Term) {
        self.0.insert(x, t);
    }

    pub fn remove(&mut self, x: &Var) -> Option<Term> {
        self.0.remove(x)
    }

    pub fn contains(&self, x: &Var) -> bool {
        self.0.contains_key(x)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.0.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Var> {
        self.0.keys()
    }

    /// Variables occurring in the range of the substitution.
    pub fn range_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for t in self.0.values() {
            t.collect_vars(&mut out);
        }
        out
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Subst) -> Subst {
        let mut out: BTreeMap<Var, Term> = other
            .0
            .iter()
            .map(|(x, t)| (x.clone(), t.apply(self)))
            .collect();
        for (x, t) in &self.0 {
            out.entry(x.clone()).or_insert_with(|| t.clone());
        }
        out.retain(|x, t| *t != Term::Var(x.clone()));
        Subst(out)
    }

    /// Checks that every binding respects sorts in `sig`.
    pub fn is_sort_respecting(&self, sig: &Signature) -> bool {
        self.0.iter().all(|(x, t)| sig.has_sort_term(t, &x.sort))
    }
}

impl FromIterator<(Var, Term)> for Subst {
    fn from_iter<I: IntoIterator<Item = (Var, Term)>>(iter: I) -> Self {
        Subst(iter.into_iter().collect())
    }
}

impl fmt::Display for Subst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (x, t)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x} ↦ {t}")?;
        }
        f.write_str("}")
    }
}

/// Source of fresh variable names of the form `base#k`. The parser rejects
/// `#`, so these never collide with user variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FreshCounter {
    next: u64,
}

impl FreshCounter {
    pub fn new() -> FreshCounter {
        FreshCounter { next: 0 }
    }

    /// A counter whose indices start at `start`; used to hand disjoint
    /// ranges to independent workers.
    pub fn starting_at(start: u64) -> FreshCounter {
        FreshCounter { next: start }
    }

    pub fn next_index(&self) -> u64 {
        self.next
    }

    pub fn fresh(&mut self, like: &Var) -> Var {
        let k = self.next;
        self.next += 1;
        Var::new(&format!("{}#{k}", like.base_name()), like.sort.clone())
    }

    /// A bijective renaming of `vars` onto fresh variables.
    pub fn renaming<'a, I: IntoIterator<Item = &'a Var>>(&mut self, vars: I) -> BTreeMap<Var, Var> {
        vars.into_iter().map(|v| (v.clone(), self.fresh(v))).collect()
    }
}
