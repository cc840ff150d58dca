//! Renders the surface syntax back to text that parses to the same tree.

use std::fmt::Write;

use super::ast::*;
use super::parser::TERM_PREC;

pub fn print_spec(f: &SpecFile) -> String {
    let mut out = String::new();
    for s in &f.sections {
        print_section(&mut out, s);
    }
    out
}

fn join<T>(items: &[T], sep: &str, show: impl Fn(&T) -> String) -> String {
    items.iter().map(show).collect::<Vec<_>>().join(sep)
}

fn binder(b: &Binder) -> String {
    format!("{} : {}", b.name.name, b.sort.name)
}

fn print_section(out: &mut String, s: &Section) {
    match s {
        Section::Sorts(ss) => writeln!(out, "sorts {};", join(ss, ", ", |i| i.name.clone())),
        Section::Subsort(a, b) => writeln!(out, "subsort {} < {};", a.name, b.name),
        Section::Symbols(ds) => {
            out.push_str("symbols\n");
            for d in ds {
                let args = join(&d.args, ", ", |i| i.name.clone());
                let sep = if args.is_empty() { "" } else { " " };
                writeln!(out, "  {} : {args}{sep}-> {};", d.name.name, d.result.name).unwrap();
            }
            Ok(())
        }
        Section::Vars(vs) => writeln!(out, "vars {};", join(vs, ", ", binder)),
        Section::Rules(rs) => {
            out.push_str("rules\n");
            for r in rs {
                write!(out, "  {} => {}", print_term(&r.lhs), print_term(&r.rhs)).unwrap();
                if let Some(g) = &r.guard {
                    write!(out, " if {}", print_expr(g)).unwrap();
                }
                out.push_str(";\n");
            }
            Ok(())
        }
        Section::Goal(g) => {
            write!(out, "{} {} => {}", g.kind.keyword(), print_cterm(&g.lhs), print_cterm(&g.rhs)).unwrap();
            for s in &g.splits {
                write!(out, " split {}", print_expr(s)).unwrap();
            }
            writeln!(out, ";")
        }
        Section::Options(os) => {
            out.push_str("options\n");
            for o in os {
                let v = match &o.value {
                    OptionValue::Int(n) => n.to_string(),
                    OptionValue::Bool(b) => b.to_string(),
                };
                writeln!(out, "  {} = {v};", o.key.name).unwrap();
            }
            Ok(())
        }
    }
    .unwrap();
}

pub fn print_cterm(ct: &CTermExpr) -> String {
    let mut out = print_term(&ct.term);
    out.push_str(" /\\ ");
    write_expr(&mut out, &ct.constraint, BinOp::And.prec());
    out
}

pub fn print_term(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, TERM_PREC);
    out
}

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, 0);
    out
}

fn write_expr(out: &mut String, e: &Expr, min: u8) {
    // Quantifier bodies extend to the right, so quantifiers are always
    // parenthesized unless they stand alone.
    let paren = e.prec() < min || (matches!(e.kind, ExprKind::Quant(..)) && min > 0);
    if paren {
        out.push('(');
    }
    match &e.kind {
        ExprKind::Int(n) => write!(out, "{n}").unwrap(),
        ExprKind::Bool(b) => write!(out, "{b}").unwrap(),
        ExprKind::Name(n) => out.push_str(n),
        ExprKind::App(f, args) => {
            out.push_str(f);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a, 0);
            }
            out.push(')');
        }
        ExprKind::Neg(x) => {
            out.push('-');
            if matches!(x.kind, ExprKind::Int(_)) {
                out.push('(');
                write_expr(out, x, 0);
                out.push(')');
            } else {
                out.push(' ');
                write_expr(out, x, NEG_PREC);
            }
        }
        ExprKind::Not(x) => {
            out.push('~');
            write_expr(out, x, NOT_PREC);
        }
        ExprKind::Binary(op, a, b) => {
            let p = op.prec();
            let (l, r) = match op.assoc() {
                Assoc::Left => (p, p + 1),
                Assoc::Right => (p + 1, p),
                Assoc::None => (p + 1, p + 1),
            };
            write_expr(out, a, l);
            write!(out, " {} ", op.symbol()).unwrap();
            write_expr(out, b, r);
        }
        ExprKind::Quant(q, bs, body) => {
            write!(out, "{} {}. ", q.keyword(), join(bs, ", ", binder)).unwrap();
            write_expr(out, body, 0);
        }
    }
    if paren {
        out.push(')');
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::{parse_expr, parse_spec};
    use super::*;
    use proptest::prelude::*;

    fn pos() -> Pos {
        Pos::default()
    }

    fn leaf() -> impl Strategy<Value = Expr> {
        prop_oneof![
            (-20i64..20).prop_map(|n| Expr::new(ExprKind::Int(n.into()), pos())),
            any::<bool>().prop_map(|b| Expr::new(ExprKind::Bool(b), pos())),
            prop::sample::select(vec!["x", "n", "comp"]).prop_map(|s| Expr::new(ExprKind::Name(s.into()), pos())),
        ]
    }

    fn ident(s: &str) -> Ident {
        Ident {
            name: s.into(),
            pos: pos(),
        }
    }

    fn expr() -> impl Strategy<Value = Expr> {
        let ops = vec![
            BinOp::Add,
            BinOp::Sub,
            BinOp::Mul,
            BinOp::Div,
            BinOp::Mod,
            BinOp::Eq,
            BinOp::Ne,
            BinOp::Lt,
            BinOp::Le,
            BinOp::Gt,
            BinOp::Ge,
            BinOp::And,
            BinOp::Or,
            BinOp::Implies,
            BinOp::Iff,
        ];
        leaf().prop_recursive(4, 24, 3, move |inner| {
            prop_oneof![
                (prop::sample::select(ops.clone()), inner.clone(), inner.clone())
                    .prop_map(|(op, a, b)| Expr::new(ExprKind::Binary(op, Box::new(a), Box::new(b)), pos())),
                inner.clone().prop_map(|a| Expr::new(ExprKind::Not(Box::new(a)), pos())),
                inner.clone().prop_map(|a| Expr::new(ExprKind::Neg(Box::new(a)), pos())),
                prop::collection::vec(inner.clone(), 0..3)
                    .prop_map(|args| Expr::new(ExprKind::App("f".into(), args), pos())),
                (any::<bool>(), inner).prop_map(|(ex, body)| {
                    let q = if ex { Quantifier::Exists } else { Quantifier::Forall };
                    let b = Binder {
                        name: ident("u"),
                        sort: ident("Int"),
                    };
                    Expr::new(ExprKind::Quant(q, vec![b], Box::new(body)), pos())
                }),
            ]
        })
    }

    proptest! {
        #[test]
        fn expressions_survive_print_then_parse(e in expr()) {
            let text = print_expr(&e);
            prop_assert_eq!(parse_expr(&text).unwrap(), e, "{}", text);
        }

        #[test]
        fn goal_sections_survive_print_then_parse(t in expr(), c in expr(), s in expr()) {
            let g = Section::Goal(GoalSpec {
                kind: GoalKind::Circ,
                lhs: CTermExpr { term: t.clone(), constraint: c.clone() },
                rhs: CTermExpr { term: t, constraint: c },
                splits: vec![s],
                pos: pos(),
            });
            let f = SpecFile { sections: vec![g] };
            let text = print_spec(&f);
            prop_assert_eq!(parse_spec(&text).unwrap(), f, "{}", text);
        }
    }

    #[test]
    fn sections_round_trip() {
        let src = "sorts Cfg, Res;\nsubsort Res < Cfg;\nsymbols\n  init : Int -> Cfg;\n  comp : -> Res;\n\
                   vars n : Int, i : Int;\nrules\n  init(n) => comp if n > 1;\n  comp => comp;\n\
                   options\n  max_depth = 10;\n  enable_disj = true;\n";
        let f = parse_spec(src).unwrap();
        assert_eq!(print_spec(&f), src);
    }
}
