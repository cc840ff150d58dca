//! Formula to SMT-LIB 2 text.

use std::collections::BTreeSet;
use std::fmt::Write;

use thiserror::Error;

use crate::constraints::{simplify, Formula};
use crate::signature::{BuiltinOp, Sort};
use crate::terms::{Op, Term, Value, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("constructor or user-sorted residue in solver query: {0}")]
    NonBuiltinResidue(String),
}

/// A closed query: existentially read free variables become constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Prepared {
    Decided(bool),
    Query { decls: Vec<Var>, body: Formula },
}

/// Closes `f` existentially, simplifies, and lifts positive existential
/// binders to top-level constants.
pub fn prepare(f: &Formula) -> Prepared {
    let closed = simplify(&Formula::exists(f.free_vars().into_iter().collect(), f.clone()));
    match closed {
        Formula::True => return Prepared::Decided(true),
        Formula::False => return Prepared::Decided(false),
        _ => {}
    }
    let mut used: BTreeSet<String> = closed.all_vars().iter().map(|v| v.name.to_string()).collect();
    let mut decls = Vec::new();
    let mut taken = BTreeSet::new();
    let body = lift(&closed, &mut used, &mut taken, &mut decls);
    Prepared::Query { decls, body }
}

fn lift(f: &Formula, used: &mut BTreeSet<String>, taken: &mut BTreeSet<String>, decls: &mut Vec<Var>) -> Formula {
    match f {
        Formula::Exists(vs, body) => {
            let mut map = std::collections::BTreeMap::new();
            for v in vs {
                let mut name = v.name.to_string();
                if taken.contains(&name) {
                    let mut k = 0;
                    while used.contains(&format!("{}#s{k}", v.base_name())) {
                        k += 1;
                    }
                    name = format!("{}#s{k}", v.base_name());
                    used.insert(name.clone());
                    map.insert(v.clone(), Var::new(&name, v.sort.clone()));
                }
                taken.insert(name.clone());
                decls.push(Var::new(&name, v.sort.clone()));
            }
            let body = if map.is_empty() {
                (**body).clone()
            } else {
                let sigma = map.into_iter().map(|(a, b)| (a, Term::Var(b))).collect();
                body.apply(&sigma)
            };
            lift(&body, used, taken, decls)
        }
        Formula::And(gs) => Formula::And(gs.iter().map(|g| lift(g, used, taken, decls)).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(|g| lift(g, used, taken, decls)).collect()),
        _ => f.clone(),
    }
}

pub fn quote(name: &str) -> String {
    format!("|{name}|")
}

fn sort_name(s: &Sort) -> Result<&'static str, EncodeError> {
    if *s == Sort::int() {
        Ok("Int")
    } else if *s == Sort::bool() {
        Ok("Bool")
    } else {
        Err(EncodeError::NonBuiltinResidue(format!("sort {s}")))
    }
}

pub fn encode_term(t: &Term, out: &mut String) -> Result<(), EncodeError> {
    match t {
        Term::Var(v) => {
            sort_name(&v.sort)?;
            out.push_str(&quote(&v.name));
        }
        Term::Lit(Value::Int(n)) => {
            if n.sign() == num_bigint::Sign::Minus {
                write!(out, "(- {})", -n).unwrap();
            } else {
                write!(out, "{n}").unwrap();
            }
        }
        Term::Lit(Value::Bool(b)) => write!(out, "{b}").unwrap(),
        Term::App(Op::Ctor(_), _) => return Err(EncodeError::NonBuiltinResidue(t.to_string())),
        Term::App(Op::Builtin(op), args) => {
            let name = match op {
                BuiltinOp::Neg => "-",
                op => op.smt_name(),
            };
            write!(out, "({name}").unwrap();
            for a in args.iter() {
                out.push(' ');
                encode_term(a, out)?;
            }
            out.push(')');
        }
    }
    Ok(())
}

pub fn encode_formula(f: &Formula, out: &mut String) -> Result<(), EncodeError> {
    let nary = |name: &str, gs: &[Formula], unit: &str, out: &mut String| -> Result<(), EncodeError> {
        match gs.len() {
            0 => out.push_str(unit),
            1 => encode_formula(&gs[0], out)?,
            _ => {
                write!(out, "({name}").unwrap();
                for g in gs {
                    out.push(' ');
                    encode_formula(g, out)?;
                }
                out.push(')');
            }
        }
        Ok(())
    };
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Eq(a, b) => {
            out.push_str("(= ");
            encode_term(a, out)?;
            out.push(' ');
            encode_term(b, out)?;
            out.push(')');
        }
        Formula::Atom(t) => encode_term(t, out)?,
        Formula::Not(g) => {
            out.push_str("(not ");
            encode_formula(g, out)?;
            out.push(')');
        }
        Formula::And(gs) => nary("and", gs, "true", out)?,
        Formula::Or(gs) => nary("or", gs, "false", out)?,
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            out.push_str(if matches!(f, Formula::Implies(..)) { "(=> " } else { "(= " });
            encode_formula(a, out)?;
            out.push(' ');
            encode_formula(b, out)?;
            out.push(')');
        }
        Formula::Exists(vs, g) | Formula::Forall(vs, g) => {
            let q = if matches!(f, Formula::Exists(..)) { "exists" } else { "forall" };
            write!(out, "({q} (").unwrap();
            for (i, v) in vs.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                write!(out, "({} {})", quote(&v.name), sort_name(&v.sort)?).unwrap();
            }
            out.push_str(") ");
            encode_formula(g, out)?;
            out.push(')');
        }
    }
    Ok(())
}

/// Renders a complete script: logic, options, declarations, one assertion,
/// `check-sat` and optionally `get-value` over the declarations.
pub fn encode_script(
    logic: &str,
    options: &[(String, String)],
    decls: &[Var],
    body: &Formula,
    want_model: bool,
) -> Result<String, EncodeError> {
    let mut out = String::new();
    writeln!(out, "(set-logic {logic})").unwrap();
    for (k, v) in options {
        writeln!(out, "(set-option :{k} {v})").unwrap();
    }
    let mut sorted: Vec<&Var> = decls.iter().collect();
    sorted.sort();
    for v in &sorted {
        writeln!(out, "(declare-const {} {})", quote(&v.name), sort_name(&v.sort)?).unwrap();
    }
    out.push_str("(assert ");
    encode_formula(body, &mut out)?;
    out.push_str(")\n(check-sat)\n");
    if want_model && !sorted.is_empty() {
        out.push_str("(get-value (");
        for (i, v) in sorted.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&quote(&v.name));
        }
        out.push_str("))\n");
    }
    Ok(out)
}

/// Encodes a formula with its free variables declared, as a one-shot
/// satisfiability script without simplification.
pub fn encode(f: &Formula, logic: &str) -> Result<String, EncodeError> {
    let decls: Vec<Var> = f.free_vars().into_iter().collect();
    encode_script(logic, &[], &decls, f, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::tests::{gt, psi, v};

    #[test]
    fn existential_maps_directly() {
        let f = Formula::exists(
            vec![Var::int("k")],
            Formula::and([
                gt(v("k"), Term::int(1)),
                Formula::eq(Term::int(6), Term::mul(Term::int(2), v("k"))),
            ]),
        );
        let s = encode(&f, "NIA").unwrap();
        assert!(s.contains("(assert (exists ((|k| Int)) (and (> |k| 1) (= 6 (* 2 |k|)))))"), "{s}");
    }

    #[test]
    fn false_asserts_false() {
        assert!(encode(&Formula::False, "NIA").unwrap().contains("(assert false)"));
    }

    #[test]
    fn free_variables_are_declared() {
        let s = encode(&psi(), "NIA").unwrap();
        assert!(s.contains("(declare-const |n| Int)"));
        assert!(s.contains("(exists ((|u| Int))"));
    }

    #[test]
    fn constructors_are_rejected() {
        let t = Term::ctor("comp", Sort::new("Cfg"), vec![]);
        let f = Formula::eq(Term::var("x", Sort::new("Cfg")), t);
        assert!(matches!(encode(&f, "NIA"), Err(EncodeError::NonBuiltinResidue(_))));
    }

    #[test]
    fn negative_literals() {
        let mut s = String::new();
        encode_term(&Term::int(-3), &mut s).unwrap();
        assert_eq!(s, "(- 3)");
    }

    #[test]
    fn prepare_lifts_existentials_apart() {
        let f = Formula::and([psi(), Formula::exists(vec![Var::int("u")], gt(v("u"), v("n")))]);
        match prepare(&f) {
            Prepared::Query { decls, .. } => {
                let names: Vec<String> = decls.iter().map(|d| d.name.to_string()).collect();
                assert!(names.contains(&"n".to_string()));
                assert!(names.contains(&"u".to_string()));
                assert!(names.iter().any(|n| n.starts_with("u#s")));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(prepare(&Formula::and([psi(), Formula::False])), Prepared::Decided(false));
    }
}
