//! Order-sorted signatures modulo builtins.
//!
//! The builtin subsignature is fixed to the SMT-LIB core `Int`/`Bool`
//! theory. Builtin constants are never declared as symbols: integer and
//! boolean literals are values carried directly by terms. Every
//! non-builtin symbol is a constructor of a user sort.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::{Arc, LazyLock};

use thiserror::Error;

use crate::terms::{Op, Term};

static INT: LazyLock<Sort> = LazyLock::new(|| Sort(Arc::from("Int")));
static BOOL: LazyLock<Sort> = LazyLock::new(|| Sort(Arc::from("Bool")));

/// A sort name. Equality is by name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sort(Arc<str>);

impl Sort {
    pub fn new(name: &str) -> Sort {
        match name {
            "Int" => Sort::int(),
            "Bool" => Sort::bool(),
            _ => Sort(Arc::from(name)),
        }
    }

    pub fn int() -> Sort {
        INT.clone()
    }

    pub fn bool() -> Sort {
        BOOL.clone()
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    pub fn is_builtin(&self) -> bool {
        matches!(&*self.0, "Int" | "Bool")
    }
}

impl fmt::Debug for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Interpreted function symbols of the builtin subsignature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BuiltinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Neg,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Not,
}

impl BuiltinOp {
    pub const ALL: [BuiltinOp; 13] = [
        BuiltinOp::Add,
        BuiltinOp::Sub,
        BuiltinOp::Mul,
        BuiltinOp::Div,
        BuiltinOp::Mod,
        BuiltinOp::Neg,
        BuiltinOp::Lt,
        BuiltinOp::Le,
        BuiltinOp::Gt,
        BuiltinOp::Ge,
        BuiltinOp::And,
        BuiltinOp::Or,
        BuiltinOp::Not,
    ];

    /// Surface-syntax name. Arithmetic and comparisons are written infix.
    pub fn name(self) -> &'static str {
        match self {
            BuiltinOp::Add => "+",
            BuiltinOp::Sub | BuiltinOp::Neg => "-",
            BuiltinOp::Mul => "*",
            BuiltinOp::Div => "div",
            BuiltinOp::Mod => "mod",
            BuiltinOp::Lt => "<",
            BuiltinOp::Le => "<=",
            BuiltinOp::Gt => ">",
            BuiltinOp::Ge => ">=",
            BuiltinOp::And => "and",
            BuiltinOp::Or => "or",
            BuiltinOp::Not => "not",
        }
    }

    pub fn smt_name(self) -> &'static str {
        // SMT-LIB happens to use the same spelling for every operator.
        self.name()
    }

    pub fn arity(self) -> usize {
        match self {
            BuiltinOp::Neg | BuiltinOp::Not => 1,
            _ => 2,
        }
    }

    pub fn arg_sort(self) -> Sort {
        match self {
            BuiltinOp::And | BuiltinOp::Or | BuiltinOp::Not => Sort::bool(),
            _ => Sort::int(),
        }
    }

    pub fn result_sort(self) -> Sort {
        match self {
            BuiltinOp::Add
            | BuiltinOp::Sub
            | BuiltinOp::Mul
            | BuiltinOp::Div
            | BuiltinOp::Mod
            | BuiltinOp::Neg => Sort::int(),
            _ => Sort::bool(),
        }
    }

    pub fn from_name(name: &str, arity: usize) -> Option<BuiltinOp> {
        BuiltinOp::ALL
            .into_iter()
            .find(|op| op.name() == name && op.arity() == arity)
    }
}

/// One overload `name : args -> result` of a user symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolDecl {
    pub name: Arc<str>,
    pub args: Vec<Sort>,
    pub result: Sort,
}

impl fmt::Display for SymbolDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} :", self.name)?;
        for (i, s) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, " {s}")?;
        }
        write!(f, " -> {}", self.result)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("sort `{0}` declared twice")]
    DuplicateSort(String),
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("symbol `{0}` declared twice with the same argument sorts")]
    DuplicateSymbol(String),
    #[error("variable `{name}` declared at sorts {first} and {second}")]
    VariableSortClash {
        name: String,
        first: Sort,
        second: Sort,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SortError {
    #[error("unknown sort `{0}`")]
    UnknownSort(Sort),
    #[error("ill-typed term `{0}`")]
    IllTyped(String),
}

/// An order-sorted signature that includes the builtin `Int`/`Bool`
/// subsignature. Immutable once built; share it behind an `Arc`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    sorts: Vec<Sort>,
    subsorts: Vec<(Sort, Sort)>,
    symbols: Vec<SymbolDecl>,
    vars: Vec<(Arc<str>, Sort)>,
    leq: BTreeSet<(Sort, Sort)>,
}

impl Default for Signature {
    fn default() -> Self {
        Signature::new()
    }
}

impl Signature {
    pub fn new() -> Signature {
        let mut sig = Signature {
            sorts: Vec::new(),
            subsorts: Vec::new(),
            symbols: Vec::new(),
            vars: Vec::new(),
            leq: BTreeSet::new(),
        };
        sig.close_subsorts();
        sig
    }

    /// User-declared sorts, in declaration order.
    pub fn user_sorts(&self) -> &[Sort] {
        &self.sorts
    }

    /// Builtin sorts followed by user sorts.
    pub fn all_sorts(&self) -> Vec<Sort> {
        let mut all = vec![Sort::int(), Sort::bool()];
        all.extend(self.sorts.iter().cloned());
        all
    }

    pub fn declared_subsorts(&self) -> &[(Sort, Sort)] {
        &self.subsorts
    }

    pub fn symbols(&self) -> &[SymbolDecl] {
        &self.symbols
    }

    pub fn variables(&self) -> &[(Arc<str>, Sort)] {
        &self.vars
    }

    pub fn has_sort(&self, s: &Sort) -> bool {
        s.is_builtin() || self.sorts.contains(s)
    }

    pub fn add_sort(&mut self, name: &str) -> Result<Sort, SignatureError> {
        let sort = Sort::new(name);
        if self.has_sort(&sort) {
            return Err(SignatureError::DuplicateSort(name.to_string()));
        }
        self.sorts.push(sort.clone());
        self.close_subsorts();
        Ok(sort)
    }

    pub fn add_subsort(&mut self, lower: &Sort, upper: &Sort) -> Result<(), SignatureError> {
        for s in [lower, upper] {
            if !self.has_sort(s) {
                return Err(SignatureError::UnknownSort(s.to_string()));
            }
        }
        self.subsorts.push((lower.clone(), upper.clone()));
        self.close_subsorts();
        Ok(())
    }

    pub fn add_symbol(
        &mut self,
        name: &str,
        args: Vec<Sort>,
        result: Sort,
    ) -> Result<(), SignatureError> {
        for s in args.iter().chain(std::iter::once(&result)) {
            if !self.has_sort(s) {
                return Err(SignatureError::UnknownSort(s.to_string()));
            }
        }
        if self
            .symbols
            .iter()
            .any(|d| &*d.name == name && d.args == args)
        {
            return Err(SignatureError::DuplicateSymbol(name.to_string()));
        }
        self.symbols.push(SymbolDecl {
            name: Arc::from(name),
            args,
            result,
        });
        Ok(())
    }

    pub fn add_variable(&mut self, name: &str, sort: Sort) -> Result<(), SignatureError> {
        if !self.has_sort(&sort) {
            return Err(SignatureError::UnknownSort(sort.to_string()));
        }
        if let Some((_, existing)) = self.vars.iter().find(|(n, _)| &**n == name) {
            if *existing == sort {
                return Ok(());
            }
            return Err(SignatureError::VariableSortClash {
                name: name.to_string(),
                first: existing.clone(),
                second: sort,
            });
        }
        self.vars.push((Arc::from(name), sort));
        Ok(())
    }

    pub fn variable_sort(&self, name: &str) -> Option<&Sort> {
        self.vars.iter().find(|(n, _)| &**n == name).map(|(_, s)| s)
    }

    pub fn overloads<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a SymbolDecl> + 'a {
        self.symbols.iter().filter(move |d| &*d.name == name)
    }

    fn close_subsorts(&mut self) {
        let all = self.all_sorts();
        let mut leq: BTreeSet<(Sort, Sort)> = all.iter().map(|s| (s.clone(), s.clone())).collect();
        leq.extend(self.subsorts.iter().cloned());
        loop {
            let mut added = Vec::new();
            for (a, b) in &leq {
                for (c, d) in leq.range((b.clone(), Sort(Arc::from("")))..) {
                    if c != b {
                        break;
                    }
                    if !leq.contains(&(a.clone(), d.clone())) {
                        added.push((a.clone(), d.clone()));
                    }
                }
            }
            if added.is_empty() {
                break;
            }
            leq.extend(added);
        }
        self.leq = leq;
    }

    /// Reflexive-transitive subsort test.
    pub fn is_subsort(&self, lower: &Sort, upper: &Sort) -> Result<bool, SortError> {
        for s in [lower, upper] {
            if !self.has_sort(s) {
                return Err(SortError::UnknownSort(s.clone()));
            }
        }
        Ok(self.leq(lower, upper))
    }

    /// Like [`Signature::is_subsort`] but treats unknown sorts as unrelated.
    pub fn leq(&self, lower: &Sort, upper: &Sort) -> bool {
        lower == upper || self.leq.contains(&(lower.clone(), upper.clone()))
    }

    fn leq_all(&self, lower: &[Sort], upper: &[Sort]) -> bool {
        lower.len() == upper.len() && lower.iter().zip(upper).all(|(a, b)| self.leq(a, b))
    }

    /// Whether two sorts lie in the same connected component of the order.
    pub fn connected(&self, a: &Sort, b: &Sort) -> bool {
        if self.leq(a, b) || self.leq(b, a) {
            return true;
        }
        let mut seen = BTreeSet::from([a.clone()]);
        let mut stack = vec![a.clone()];
        while let Some(s) = stack.pop() {
            for (x, y) in &self.leq {
                let next = if *x == s {
                    y
                } else if *y == s {
                    x
                } else {
                    continue;
                };
                if next == b {
                    return true;
                }
                if seen.insert(next.clone()) {
                    stack.push(next.clone());
                }
            }
        }
        false
    }

    /// Picks the overload of `name` applicable to arguments of the given
    /// sorts whose result sort is least.
    pub fn resolve(&self, name: &str, arg_sorts: &[Sort]) -> Option<&SymbolDecl> {
        let candidates: Vec<&SymbolDecl> = self
            .symbols
            .iter()
            .filter(|d| &*d.name == name)
            .filter(|d| self.leq_all(arg_sorts, &d.args))
            .collect();
        candidates
            .iter()
            .find(|d| candidates.iter().all(|o| self.leq(&d.result, &o.result)))
            .copied()
            .or_else(|| candidates.first().copied())
    }

    /// Least sort of a well-formed term.
    pub fn least_sort(&self, t: &Term) -> Result<Sort, SortError> {
        match t {
            Term::Var(v) => Ok(v.sort.clone()),
            Term::Lit(v) => Ok(v.sort()),
            Term::App(Op::Builtin(op), args) => {
                if args.len() != op.arity() {
                    return Err(SortError::IllTyped(t.to_string()));
                }
                for a in args.iter() {
                    let s = self.least_sort(a)?;
                    if !self.leq(&s, &op.arg_sort()) {
                        return Err(SortError::IllTyped(t.to_string()));
                    }
                }
                Ok(op.result_sort())
            }
            Term::App(Op::Ctor(c), args) => {
                let sorts = args
                    .iter()
                    .map(|a| self.least_sort(a))
                    .collect::<Result<Vec<_>, _>>()?;
                self.resolve(&c.name, &sorts)
                    .map(|d| d.result.clone())
                    .ok_or_else(|| SortError::IllTyped(t.to_string()))
            }
        }
    }

    /// Whether `t` has sort `s`, i.e. its least sort is below `s`.
    pub fn has_sort_term(&self, t: &Term, s: &Sort) -> bool {
        self.least_sort(t).map(|ls| self.leq(&ls, s)).unwrap_or(false)
    }

    /// Whether sort `s` has finitely many ground constructor terms once
    /// integers are bounded, i.e. no constructor cycle reaches it.
    pub fn is_finitary(&self, s: &Sort) -> bool {
        fn visit(sig: &Signature, s: &Sort, path: &mut Vec<Sort>) -> bool {
            if s.is_builtin() {
                return true;
            }
            if path.contains(s) {
                return false;
            }
            path.push(s.clone());
            let ok = sig
                .symbols
                .iter()
                .filter(|d| sig.leq(&d.result, s))
                .all(|d| d.args.iter().all(|a| visit(sig, a, path)))
                && sig
                    .all_sorts()
                    .iter()
                    .filter(|sub| *sub != s && sig.leq(sub, s))
                    .all(|sub| visit(sig, sub, path));
            path.pop();
            ok
        }
        visit(self, s, &mut Vec::new())
    }
}

/// One violated signature condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    SubsortCycle { lower: Sort, upper: Sort },
    BuiltinSubsort { lower: Sort, upper: Sort },
    Monotonicity { first: SymbolDecl, second: SymbolDecl },
    Preregularity { symbol: String, args: Vec<Sort> },
    BuiltinOverlap { symbol: String, arity: usize },
    BuiltinResult { symbol: SymbolDecl },
    Uninhabited { sort: Sort },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SubsortCycle { lower, upper } => {
                write!(f, "subsort cycle between {lower} and {upper}")
            }
            Violation::BuiltinSubsort { lower, upper } => {
                write!(f, "builtin sort {upper} cannot have subsort {lower}")
            }
            Violation::Monotonicity { first, second } => write!(
                f,
                "monotonicity violated by `{first}` and `{second}`: result sorts are not ordered"
            ),
            Violation::Preregularity { symbol, args } => {
                write!(f, "`{symbol}` has no least sort for arguments {args:?}")
            }
            Violation::BuiltinOverlap { symbol, arity } => {
                write!(f, "user symbol `{symbol}` of arity {arity} clashes with a builtin")
            }
            Violation::BuiltinResult { symbol } => {
                write!(f, "user symbol `{symbol}` has a builtin result sort")
            }
            Violation::Uninhabited { sort } => write!(f, "sort {sort} has no ground terms"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_admitted(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("signature admitted");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

// Upper bound on argument-sort tuples explored per overloaded symbol.
const PREREGULARITY_TUPLE_CAP: usize = 1 << 16;

/// Checks every admission condition on a signature and lists violations.
pub fn validate_signature(sig: &Signature) -> ValidationReport {
    let mut violations = Vec::new();
    let all = sig.all_sorts();

    for a in &all {
        for b in &all {
            if a < b && sig.leq(a, b) && sig.leq(b, a) {
                violations.push(Violation::SubsortCycle {
                    lower: a.clone(),
                    upper: b.clone(),
                });
            }
        }
    }
    for (lower, upper) in sig.declared_subsorts() {
        if upper.is_builtin() && lower != upper {
            violations.push(Violation::BuiltinSubsort {
                lower: lower.clone(),
                upper: upper.clone(),
            });
        }
    }

    for d in sig.symbols() {
        let arity = d.args.len();
        let clashes = BuiltinOp::from_name(&d.name, arity).is_some()
            || (arity == 0 && matches!(&*d.name, "true" | "false"))
            || (arity == 2 && &*d.name == "=");
        if clashes {
            violations.push(Violation::BuiltinOverlap {
                symbol: d.name.to_string(),
                arity,
            });
        }
        if d.result.is_builtin() {
            violations.push(Violation::BuiltinResult { symbol: d.clone() });
        }
    }

    let syms = sig.symbols();
    for (i, d1) in syms.iter().enumerate() {
        for d2 in &syms[i + 1..] {
            if d1.name != d2.name || d1.args.len() != d2.args.len() {
                continue;
            }
            let mono = |a: &SymbolDecl, b: &SymbolDecl| {
                !sig.leq_all(&a.args, &b.args) || sig.leq(&a.result, &b.result)
            };
            if !mono(d1, d2) || !mono(d2, d1) {
                violations.push(Violation::Monotonicity {
                    first: d1.clone(),
                    second: d2.clone(),
                });
            }
        }
    }

    let mut by_name: BTreeMap<(&str, usize), Vec<&SymbolDecl>> = BTreeMap::new();
    for d in syms {
        by_name.entry((&d.name, d.args.len())).or_default().push(d);
    }
    for ((name, arity), decls) in by_name {
        if decls.len() < 2 {
            continue;
        }
        let total = all.len().checked_pow(arity as u32).unwrap_or(usize::MAX);
        if total > PREREGULARITY_TUPLE_CAP {
            log::warn!("preregularity of `{name}` not checked: {total} argument tuples");
            continue;
        }
        for idx in 0..total {
            let mut rest = idx;
            let w: Vec<Sort> = (0..arity)
                .map(|_| {
                    let s = all[rest % all.len()].clone();
                    rest /= all.len();
                    s
                })
                .collect();
            let results: Vec<&Sort> = decls
                .iter()
                .filter(|d| sig.leq_all(&w, &d.args))
                .map(|d| &d.result)
                .collect();
            if results.is_empty() {
                continue;
            }
            if !results
                .iter()
                .any(|r| results.iter().all(|o| sig.leq(r, o)))
            {
                violations.push(Violation::Preregularity {
                    symbol: name.to_string(),
                    args: w,
                });
            }
        }
    }

    let mut inhabited: BTreeSet<Sort> = [Sort::int(), Sort::bool()].into();
    loop {
        let mut changed = false;
        for d in syms {
            if !inhabited.contains(&d.result) && d.args.iter().all(|a| inhabited.contains(a)) {
                inhabited.insert(d.result.clone());
                changed = true;
            }
        }
        for s in &all {
            if !inhabited.contains(s) && inhabited.iter().any(|sub| sig.leq(sub, s)) {
                inhabited.insert(s.clone());
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    for s in sig.user_sorts() {
        if !inhabited.contains(s) {
            violations.push(Violation::Uninhabited { sort: s.clone() });
        }
    }

    ValidationReport { violations }
}
