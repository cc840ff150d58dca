use std::sync::Arc;

use num_traits::ToPrimitive;

use super::ast::*;
use super::{ResolutionError, Spec, SpecError, SpecGoal, SpecOptions};
use crate::constraints::{ConstrainedTerm, Formula};
use crate::lctrs::{Lctrs, LctrsError, ReachabilityFormula, RewriteRule};
use crate::signature::{validate_signature, BuiltinOp, Signature, Sort};
use crate::terms::{Term, Value, Var};

type Res<T> = Result<T, ResolutionError>;

fn sort(sig: &Signature, id: &Ident) -> Res<Sort> {
    let s = Sort::new(&id.name);
    if sig.has_sort(&s) {
        Ok(s)
    } else {
        Err(ResolutionError::new(id.pos, format!("unknown sort `{}`", id.name)))
    }
}

/// Builds the signature first, then rules, goals and options, so sections
/// may appear in any order.
pub fn resolve(file: &SpecFile) -> Result<Spec, SpecError> {
    let mut sig = Signature::new();
    let err = |pos: Pos| move |e: crate::signature::SignatureError| ResolutionError::new(pos, e.to_string());
    for s in &file.sections {
        if let Section::Sorts(ids) = s {
            for id in ids {
                sig.add_sort(&id.name).map_err(err(id.pos))?;
            }
        }
    }
    for s in &file.sections {
        if let Section::Subsort(a, b) = s {
            let (lower, upper) = (sort(&sig, a)?, sort(&sig, b)?);
            sig.add_subsort(&lower, &upper).map_err(err(a.pos))?;
        }
    }
    for s in &file.sections {
        if let Section::Symbols(ds) = s {
            for d in ds {
                let args = d.args.iter().map(|a| sort(&sig, a)).collect::<Res<Vec<_>>>()?;
                let result = sort(&sig, &d.result)?;
                sig.add_symbol(&d.name.name, args, result).map_err(err(d.name.pos))?;
            }
        }
    }
    for s in &file.sections {
        if let Section::Vars(bs) = s {
            for b in bs {
                if sig.overloads(&b.name.name).next().is_some() {
                    return Err(ResolutionError::new(b.name.pos, format!("`{}` is already a symbol", b.name.name)).into());
                }
                let s = sort(&sig, &b.sort)?;
                sig.add_variable(&b.name.name, s).map_err(err(b.name.pos))?;
            }
        }
    }
    let report = validate_signature(&sig);
    if !report.is_admitted() {
        return Err(SpecError::Signature(report));
    }
    let sig = Arc::new(sig);

    let mut rules = Vec::new();
    let mut rule_pos = Vec::new();
    let mut goals = Vec::new();
    let mut options = SpecOptions::default();
    for s in &file.sections {
        match s {
            Section::Rules(rs) => {
                for r in rs {
                    let mut cx = Cx::new(&sig);
                    let lhs = cx.term(&r.lhs)?;
                    let rhs = cx.term(&r.rhs)?;
                    let guard = match &r.guard {
                        Some(g) => cx.formula(g)?,
                        None => Formula::True,
                    };
                    rules.push(RewriteRule::new(lhs, rhs, guard));
                    rule_pos.push(r.pos);
                }
            }
            Section::Goal(g) => {
                let mut cx = Cx::new(&sig);
                let formula = ReachabilityFormula::new(cx.cterm(&g.lhs)?, cx.cterm(&g.rhs)?);
                let splits = g.splits.iter().map(|s| cx.formula(s)).collect::<Res<Vec<_>>>()?;
                goals.push(SpecGoal {
                    kind: g.kind,
                    formula,
                    splits,
                    pos: g.pos,
                });
            }
            Section::Options(os) => {
                for o in os {
                    set_option(&mut options, o)?;
                }
            }
            _ => {}
        }
    }
    let lctrs = Lctrs::new(sig, rules).map_err(|e| {
        let LctrsError::IllSortedRule { index, .. } = &e;
        ResolutionError::new(rule_pos[*index], e.to_string())
    })?;
    Ok(Spec { lctrs, goals, options })
}

pub(super) fn cterm(sig: &Signature, ct: &CTermExpr) -> Res<ConstrainedTerm> {
    Cx::new(sig).cterm(ct)
}

fn set_option(opts: &mut SpecOptions, o: &OptionSpec) -> Res<()> {
    let bad = |what: &str| ResolutionError::new(o.key.pos, format!("option `{}` expects {what}", o.key.name));
    let int = || match &o.value {
        OptionValue::Int(n) => n.to_u64().ok_or_else(|| bad("a non-negative integer")),
        OptionValue::Bool(_) => Err(bad("an integer")),
    };
    match o.key.name.as_str() {
        "max_depth" => opts.max_depth = Some(int()? as usize),
        "max_branch" => opts.max_branch = Some(int()? as usize),
        "node_budget" => opts.node_budget = Some(int()? as usize),
        "timeout_ms" => opts.timeout_ms = Some(int()?),
        "bound" => opts.bound = Some(u32::try_from(int()?).map_err(|_| bad("a bound below 2^32"))?),
        "steps" => opts.steps = Some(int()? as usize),
        "enable_disj" => match o.value {
            OptionValue::Bool(b) => opts.enable_disj = Some(b),
            OptionValue::Int(_) => return Err(bad("a boolean")),
        },
        k => return Err(ResolutionError::new(o.key.pos, format!("unknown option `{k}`"))),
    }
    Ok(())
}

/// Resolution context: the signature and the quantifier binders in scope.
struct Cx<'a> {
    sig: &'a Signature,
    scope: Vec<Var>,
}

impl<'a> Cx<'a> {
    fn new(sig: &'a Signature) -> Cx<'a> {
        Cx { sig, scope: Vec::new() }
    }

    fn sort_of(&self, t: &Term, pos: Pos) -> Res<Sort> {
        self.sig
            .least_sort(t)
            .map_err(|_| ResolutionError::new(pos, format!("ill-sorted term `{t}`")))
    }

    fn cterm(&mut self, ct: &CTermExpr) -> Res<ConstrainedTerm> {
        Ok(ConstrainedTerm::new(self.term(&ct.term)?, self.formula(&ct.constraint)?))
    }

    fn term(&mut self, e: &Expr) -> Res<Term> {
        let t = match &e.kind {
            ExprKind::Int(n) => Term::int(n.clone()),
            ExprKind::Bool(b) => Term::boolean(*b),
            ExprKind::Name(n) => self.name(n, e.pos)?,
            ExprKind::App(f, es) => {
                let mut args = Vec::new();
                let mut sorts = Vec::new();
                for a in es {
                    let t = self.term(a)?;
                    sorts.push(self.sort_of(&t, a.pos)?);
                    args.push(t);
                }
                if self.sig.overloads(f).next().is_none() {
                    return Err(ResolutionError::new(e.pos, format!("unknown symbol `{f}`")));
                }
                let Some(d) = self.sig.resolve(f, &sorts) else {
                    let shown: Vec<String> = sorts.iter().map(Sort::to_string).collect();
                    return Err(ResolutionError::new(
                        e.pos,
                        format!("no declaration of `{f}` accepts ({})", shown.join(", ")),
                    ));
                };
                Term::ctor(f, d.result.clone(), args)
            }
            ExprKind::Neg(x) => Term::builtin(BuiltinOp::Neg, vec![self.term(x)?]),
            ExprKind::Binary(op, a, b) => {
                let op = match op {
                    BinOp::Add => BuiltinOp::Add,
                    BinOp::Sub => BuiltinOp::Sub,
                    BinOp::Mul => BuiltinOp::Mul,
                    BinOp::Div => BuiltinOp::Div,
                    BinOp::Mod => BuiltinOp::Mod,
                    BinOp::Lt => BuiltinOp::Lt,
                    BinOp::Le => BuiltinOp::Le,
                    BinOp::Gt => BuiltinOp::Gt,
                    BinOp::Ge => BuiltinOp::Ge,
                    _ => return Err(ResolutionError::new(e.pos, "expected a term, found a formula")),
                };
                Term::builtin(op, vec![self.term(a)?, self.term(b)?])
            }
            ExprKind::Not(_) | ExprKind::Quant(..) => {
                return Err(ResolutionError::new(e.pos, "expected a term, found a formula"))
            }
        };
        self.sort_of(&t, e.pos)?;
        Ok(t)
    }

    fn name(&self, n: &str, pos: Pos) -> Res<Term> {
        if let Some(v) = self.scope.iter().rev().find(|v| &*v.name == n) {
            return Ok(Term::Var(v.clone()));
        }
        if let Some(s) = self.sig.variable_sort(n) {
            return Ok(Term::var(n, s.clone()));
        }
        match self.sig.resolve(n, &[]) {
            Some(d) => Ok(Term::ctor(n, d.result.clone(), vec![])),
            None => Err(ResolutionError::new(pos, format!("unknown identifier `{n}`"))),
        }
    }

    fn formula(&mut self, e: &Expr) -> Res<Formula> {
        Ok(match &e.kind {
            ExprKind::Bool(true) => Formula::True,
            ExprKind::Bool(false) => Formula::False,
            ExprKind::Not(x) => Formula::not(self.formula(x)?),
            ExprKind::Binary(op, a, b) => match op {
                BinOp::And => Formula::and([self.formula(a)?, self.formula(b)?]),
                BinOp::Or => Formula::or([self.formula(a)?, self.formula(b)?]),
                BinOp::Implies => Formula::implies(self.formula(a)?, self.formula(b)?),
                BinOp::Iff => Formula::iff(self.formula(a)?, self.formula(b)?),
                BinOp::Eq | BinOp::Ne => {
                    let (x, y) = (self.term(a)?, self.term(b)?);
                    let (sx, sy) = (self.sort_of(&x, a.pos)?, self.sort_of(&y, b.pos)?);
                    if !self.sig.connected(&sx, &sy) {
                        return Err(ResolutionError::new(e.pos, format!("cannot compare sorts {sx} and {sy}")));
                    }
                    let eq = Formula::eq(x, y);
                    if *op == BinOp::Eq {
                        eq
                    } else {
                        Formula::not(eq)
                    }
                }
                _ => self.atom(e)?,
            },
            ExprKind::Quant(q, bs, body) => {
                let n = self.scope.len();
                let mut vars = Vec::new();
                for b in bs {
                    let s = sort(self.sig, &b.sort)?;
                    if self.sig.overloads(&b.name.name).next().is_some() {
                        return Err(ResolutionError::new(b.name.pos, format!("`{}` is already a symbol", b.name.name)));
                    }
                    if let Some(declared) = self.sig.variable_sort(&b.name.name) {
                        if *declared != s {
                            return Err(ResolutionError::new(
                                b.name.pos,
                                format!("variable `{}` is declared with sort {declared}", b.name.name),
                            ));
                        }
                    }
                    let v = Var::new(&b.name.name, s);
                    self.scope.push(v.clone());
                    vars.push(v);
                }
                let body = self.formula(body);
                self.scope.truncate(n);
                match q {
                    Quantifier::Exists => Formula::exists(vars, body?),
                    Quantifier::Forall => Formula::forall(vars, body?),
                }
            }
            _ => self.atom(e)?,
        })
    }

    fn atom(&mut self, e: &Expr) -> Res<Formula> {
        let t = self.term(e)?;
        if self.sort_of(&t, e.pos)? != Sort::bool() {
            return Err(ResolutionError::new(e.pos, format!("expected a formula, found `{t}`")));
        }
        Ok(match t {
            Term::Lit(Value::Bool(true)) => Formula::True,
            Term::Lit(Value::Bool(false)) => Formula::False,
            t => Formula::Atom(t),
        })
    }
}
