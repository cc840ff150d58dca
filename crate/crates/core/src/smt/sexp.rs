//! S-expressions: reading solver output and parsing scripts back into
//! formulas.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;

use crate::constraints::Formula;
use crate::signature::{BuiltinOp, Sort};
use crate::terms::{Term, Value, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    /// A `|quoted|` symbol, stored without the bars.
    Quoted(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn symbol(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s) | Sexp::Quoted(s) => Some(s),
            Sexp::List(_) => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(xs) => Some(xs),
            _ => None,
        }
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(s) => f.write_str(s),
            Sexp::Quoted(s) => write!(f, "|{s}|"),
            Sexp::List(xs) => {
                f.write_str("(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Parses every s-expression in `text`.
pub fn parse_all(text: &str) -> Result<Vec<Sexp>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut pos = 0;
    let mut out = Vec::new();
    loop {
        skip_ws(&chars, &mut pos);
        if pos >= chars.len() {
            return Ok(out);
        }
        out.push(parse_one(&chars, &mut pos)?);
    }
}

fn skip_ws(chars: &[char], pos: &mut usize) {
    while *pos < chars.len() {
        if chars[*pos].is_whitespace() {
            *pos += 1;
        } else if chars[*pos] == ';' {
            while *pos < chars.len() && chars[*pos] != '\n' {
                *pos += 1;
            }
        } else {
            break;
        }
    }
}

fn parse_one(chars: &[char], pos: &mut usize) -> Result<Sexp, String> {
    skip_ws(chars, pos);
    match chars.get(*pos) {
        None => Err("unexpected end of input".into()),
        Some('(') => {
            *pos += 1;
            let mut items = Vec::new();
            loop {
                skip_ws(chars, pos);
                match chars.get(*pos) {
                    None => return Err("unclosed parenthesis".into()),
                    Some(')') => {
                        *pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    _ => items.push(parse_one(chars, pos)?),
                }
            }
        }
        Some(')') => Err(format!("unexpected ')' at offset {pos}")),
        Some('|') => {
            let start = *pos + 1;
            let end = chars[start..]
                .iter()
                .position(|&c| c == '|')
                .ok_or("unterminated quoted symbol")?;
            *pos = start + end + 1;
            Ok(Sexp::Quoted(chars[start..start + end].iter().collect()))
        }
        Some('"') => {
            let start = *pos;
            *pos += 1;
            while *pos < chars.len() {
                if chars[*pos] == '"' {
                    if chars.get(*pos + 1) == Some(&'"') {
                        *pos += 2;
                        continue;
                    }
                    *pos += 1;
                    return Ok(Sexp::Atom(chars[start..*pos].iter().collect()));
                }
                *pos += 1;
            }
            Err("unterminated string".into())
        }
        Some(_) => {
            let start = *pos;
            while *pos < chars.len() && !chars[*pos].is_whitespace() && !matches!(chars[*pos], '(' | ')' | ';') {
                *pos += 1;
            }
            Ok(Sexp::Atom(chars[start..*pos].iter().collect()))
        }
    }
}

/// A parsed query script: declared constants and the asserted formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedScript {
    pub logic: String,
    pub options: Vec<(String, String)>,
    pub decls: Vec<Var>,
    pub assertion: Formula,
    pub get_value: bool,
}

/// Parses a script produced by the encoder.
pub fn parse_script(text: &str) -> Result<ParsedScript, String> {
    let mut logic = String::new();
    let mut options = Vec::new();
    let mut decls = Vec::new();
    let mut assertion = None;
    let mut get_value = false;
    for cmd in parse_all(text)? {
        let items = cmd.list().ok_or("top-level atom")?;
        match items.first().and_then(Sexp::symbol) {
            Some("set-logic") => logic = items[1].to_string(),
            Some("set-option") => {
                let key = items[1].to_string();
                options.push((key.trim_start_matches(':').to_string(), items[2].to_string()));
            }
            Some("declare-const") => {
                let name = items[1].symbol().ok_or("bad declaration")?;
                decls.push(Var::new(name, parse_sort(&items[2])?));
            }
            Some("assert") => {
                let env: BTreeMap<String, Sort> =
                    decls.iter().map(|v: &Var| (v.name.to_string(), v.sort.clone())).collect();
                assertion = Some(to_formula(&items[1], &env)?);
            }
            Some("check-sat") => {}
            Some("get-value") => get_value = true,
            other => return Err(format!("unsupported command {other:?}")),
        }
    }
    Ok(ParsedScript {
        logic,
        options,
        decls,
        assertion: assertion.ok_or("no assertion")?,
        get_value,
    })
}

fn parse_sort(s: &Sexp) -> Result<Sort, String> {
    match s.symbol() {
        Some("Int") => Ok(Sort::int()),
        Some("Bool") => Ok(Sort::bool()),
        _ => Err(format!("unsupported sort {s}")),
    }
}

fn is_bool(s: &Sexp, env: &BTreeMap<String, Sort>) -> bool {
    match s {
        Sexp::Atom(a) if a == "true" || a == "false" => true,
        Sexp::Atom(a) | Sexp::Quoted(a) => env.get(a).is_some_and(|s| *s == Sort::bool()),
        Sexp::List(xs) => matches!(
            xs.first().and_then(Sexp::symbol),
            Some("and" | "or" | "not" | "=>" | "exists" | "forall" | "<" | "<=" | ">" | ">=" | "=")
        ),
    }
}

/// Converts an SMT-LIB boolean expression to a formula.
pub fn to_formula(s: &Sexp, env: &BTreeMap<String, Sort>) -> Result<Formula, String> {
    match s {
        Sexp::Atom(a) if a == "true" => Ok(Formula::True),
        Sexp::Atom(a) if a == "false" => Ok(Formula::False),
        Sexp::Atom(_) | Sexp::Quoted(_) => Ok(Formula::Atom(to_term(s, env)?)),
        Sexp::List(xs) => {
            let head = xs.first().and_then(Sexp::symbol).ok_or("empty application")?;
            let args = &xs[1..];
            let fs = || args.iter().map(|a| to_formula(a, env)).collect::<Result<Vec<_>, _>>();
            match head {
                "and" => Ok(Formula::And(fs()?)),
                "or" => Ok(Formula::Or(fs()?)),
                "not" => Ok(Formula::not(to_formula(&args[0], env)?)),
                "=>" => Ok(Formula::implies(to_formula(&args[0], env)?, to_formula(&args[1], env)?)),
                "=" if is_bool(&args[0], env) => {
                    Ok(Formula::iff(to_formula(&args[0], env)?, to_formula(&args[1], env)?))
                }
                "=" => Ok(Formula::eq(to_term(&args[0], env)?, to_term(&args[1], env)?)),
                "exists" | "forall" => {
                    let mut inner = env.clone();
                    let mut vs = Vec::new();
                    for b in args[0].list().ok_or("bad binder list")? {
                        let pair = b.list().ok_or("bad binder")?;
                        let name = pair[0].symbol().ok_or("bad binder name")?;
                        let sort = parse_sort(&pair[1])?;
                        inner.insert(name.to_string(), sort.clone());
                        vs.push(Var::new(name, sort));
                    }
                    let body = Box::new(to_formula(&args[1], &inner)?);
                    Ok(if head == "exists" {
                        Formula::Exists(vs, body)
                    } else {
                        Formula::Forall(vs, body)
                    })
                }
                _ => Ok(Formula::Atom(to_term(s, env)?)),
            }
        }
    }
}

/// Converts an SMT-LIB term to a term.
pub fn to_term(s: &Sexp, env: &BTreeMap<String, Sort>) -> Result<Term, String> {
    match s {
        Sexp::Atom(a) if a == "true" => Ok(Term::boolean(true)),
        Sexp::Atom(a) if a == "false" => Ok(Term::boolean(false)),
        Sexp::Atom(a) if a.chars().all(|c| c.is_ascii_digit()) => {
            Ok(Term::int(a.parse::<BigInt>().map_err(|e| e.to_string())?))
        }
        Sexp::Atom(a) | Sexp::Quoted(a) => env
            .get(a)
            .map(|sort| Term::var(a, sort.clone()))
            .ok_or_else(|| format!("undeclared symbol {a}")),
        Sexp::List(xs) => {
            let head = xs.first().and_then(Sexp::symbol).ok_or("empty application")?;
            let args: Vec<Term> = xs[1..].iter().map(|a| to_term(a, env)).collect::<Result<_, _>>()?;
            if head == "-" && args.len() == 1 {
                if let Some(n) = args[0].as_int() {
                    return Ok(Term::int(-n));
                }
                return Ok(Term::builtin(BuiltinOp::Neg, args));
            }
            let op = BuiltinOp::ALL
                .into_iter()
                .find(|op| op.smt_name() == head && op.arity() == args.len() && *op != BuiltinOp::Neg)
                .ok_or_else(|| format!("unsupported operator {head}/{}", args.len()))?;
            Ok(Term::builtin(op, args))
        }
    }
}

/// Reads a `get-value` response into variable/value pairs.
pub fn parse_model(s: &Sexp, decls: &[Var]) -> Result<Vec<(Var, Value)>, String> {
    let env: BTreeMap<String, Sort> = BTreeMap::new();
    let mut out = Vec::new();
    for pair in s.list().ok_or("model is not a list")? {
        let items = pair.list().ok_or("model entry is not a pair")?;
        let name = items[0].symbol().ok_or("model key is not a symbol")?;
        let var = decls
            .iter()
            .find(|v| &*v.name == name)
            .ok_or_else(|| format!("unknown model symbol {name}"))?;
        match to_term(&items[1], &env)? {
            Term::Lit(v) => out.push((var.clone(), v)),
            other => return Err(format!("non-literal model value {other}")),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::tests::psi;
    use crate::smt::encode::encode;

    #[test]
    fn script_round_trip_is_identical() {
        let text = encode(&psi(), "NIA").unwrap();
        let parsed = parse_script(&text).unwrap();
        let again = crate::smt::encode::encode_script(
            &parsed.logic,
            &parsed.options,
            &parsed.decls,
            &parsed.assertion,
            parsed.get_value,
        )
        .unwrap();
        assert_eq!(text, again);
    }

    #[test]
    fn model_values() {
        let decls = vec![Var::int("n"), Var::int("i#3")];
        let sx = &parse_all("((|n| 6) (|i#3| (- 2)))").unwrap()[0];
        let m = parse_model(sx, &decls).unwrap();
        assert_eq!(m[0].1, Value::Int(6.into()));
        assert_eq!(m[1].1, Value::Int((-2).into()));
    }
}
