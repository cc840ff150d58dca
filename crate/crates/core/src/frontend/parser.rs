//! Recursive descent over the token stream; binary operators by
//! precedence climbing.

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;

/// Minimum precedence at which term positions are parsed, so a term
/// stops before comparisons and connectives.
pub const TERM_PREC: u8 = 7;

struct Parser {
    toks: Vec<Token>,
    at: usize,
}

pub fn parse_spec(src: &str) -> Result<SpecFile, ParseError> {
    let mut p = Parser::new(src)?;
    let mut sections = Vec::new();
    while p.peek() != &Tok::Eof {
        sections.push(p.section()?);
    }
    if sections.is_empty() {
        return Err(p.error("expected at least one section"));
    }
    Ok(SpecFile { sections })
}

/// Parses a standalone `term /\ formula`.
pub fn parse_cterm(src: &str) -> Result<CTermExpr, ParseError> {
    let mut p = Parser::new(src)?;
    let ct = p.cterm()?;
    p.expect(Tok::Eof)?;
    Ok(ct)
}

pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(src)?;
    let e = p.expr(0)?;
    p.expect(Tok::Eof)?;
    Ok(e)
}

impl Parser {
    fn new(src: &str) -> Result<Parser, ParseError> {
        Ok(Parser {
            toks: tokenize(src)?,
            at: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.pos(), msg)
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        self.error(format!("expected {wanted}, found {}", self.peek()))
    }

    fn expect(&mut self, t: Tok) -> Result<Pos, ParseError> {
        if *self.peek() == t {
            Ok(self.bump().pos)
        } else {
            Err(self.unexpected(&t.to_string()))
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        let hit = self.at_keyword(kw);
        if hit {
            self.bump();
        }
        hit
    }

    fn at_section_end(&self) -> bool {
        match self.peek() {
            Tok::Eof => true,
            Tok::Ident(s) => SECTION_KEYWORDS.contains(&s.as_str()),
            _ => false,
        }
    }

    fn ident(&mut self) -> Result<Ident, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) if !is_keyword(&name) => {
                let pos = self.bump().pos;
                Ok(Ident { name, pos })
            }
            Tok::Ident(name) => Err(self.error(format!("`{name}` is a keyword"))),
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn binder(&mut self) -> Result<Binder, ParseError> {
        let name = self.ident()?;
        self.expect(Tok::Colon)?;
        let sort = self.ident()?;
        Ok(Binder { name, sort })
    }

    fn section(&mut self) -> Result<Section, ParseError> {
        let Tok::Ident(kw) = self.peek().clone() else {
            return Err(self.unexpected("a section keyword"));
        };
        let pos = self.pos();
        match kw.as_str() {
            "sorts" => {
                self.bump();
                let mut sorts = vec![self.ident()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    sorts.push(self.ident()?);
                }
                self.expect(Tok::Semi)?;
                Ok(Section::Sorts(sorts))
            }
            "subsort" => {
                self.bump();
                let lower = self.ident()?;
                self.expect(Tok::Lt)?;
                let upper = self.ident()?;
                self.expect(Tok::Semi)?;
                Ok(Section::Subsort(lower, upper))
            }
            "symbols" => {
                self.bump();
                let mut decls = Vec::new();
                loop {
                    let name = self.ident()?;
                    self.expect(Tok::Colon)?;
                    let mut args = Vec::new();
                    if *self.peek() != Tok::Implies {
                        args.push(self.ident()?);
                        while *self.peek() == Tok::Comma {
                            self.bump();
                            args.push(self.ident()?);
                        }
                    }
                    self.expect(Tok::Implies)?;
                    let result = self.ident()?;
                    self.expect(Tok::Semi)?;
                    decls.push(SymbolSpec { name, args, result });
                    if self.at_section_end() {
                        break;
                    }
                }
                Ok(Section::Symbols(decls))
            }
            "vars" => {
                self.bump();
                let mut vars = vec![self.binder()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    vars.push(self.binder()?);
                }
                self.expect(Tok::Semi)?;
                Ok(Section::Vars(vars))
            }
            "rules" => {
                self.bump();
                let mut rules = Vec::new();
                loop {
                    let pos = self.pos();
                    let lhs = self.expr(TERM_PREC)?;
                    self.expect(Tok::Arrow)?;
                    let rhs = self.expr(TERM_PREC)?;
                    let guard = if self.eat_keyword("if") {
                        Some(self.expr(0)?)
                    } else {
                        None
                    };
                    self.expect(Tok::Semi)?;
                    rules.push(RuleSpec { lhs, rhs, guard, pos });
                    if self.at_section_end() {
                        break;
                    }
                }
                Ok(Section::Rules(rules))
            }
            "prove" | "circ" => {
                self.bump();
                let kind = if kw == "prove" { GoalKind::Prove } else { GoalKind::Circ };
                let lhs = self.cterm()?;
                self.expect(Tok::Arrow)?;
                let rhs = self.cterm()?;
                let mut splits = Vec::new();
                while self.eat_keyword("split") {
                    splits.push(self.expr(0)?);
                }
                self.expect(Tok::Semi)?;
                Ok(Section::Goal(GoalSpec {
                    kind,
                    lhs,
                    rhs,
                    splits,
                    pos,
                }))
            }
            "options" => {
                self.bump();
                let mut opts = Vec::new();
                loop {
                    let key = self.ident()?;
                    self.expect(Tok::Eq)?;
                    let negative = *self.peek() == Tok::Minus;
                    if negative {
                        self.bump();
                    }
                    let value = match self.peek().clone() {
                        Tok::Int(n) => OptionValue::Int(if negative { -n } else { n }),
                        Tok::Ident(b) if !negative && (b == "true" || b == "false") => OptionValue::Bool(b == "true"),
                        _ => return Err(self.unexpected("an integer or boolean")),
                    };
                    self.bump();
                    self.expect(Tok::Semi)?;
                    opts.push(OptionSpec { key, value });
                    if self.at_section_end() {
                        break;
                    }
                }
                Ok(Section::Options(opts))
            }
            _ => Err(self.unexpected("a section keyword")),
        }
    }

    fn cterm(&mut self) -> Result<CTermExpr, ParseError> {
        let term = self.expr(TERM_PREC)?;
        self.expect(Tok::And)?;
        let constraint = self.expr(0)?;
        Ok(CTermExpr { term, constraint })
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            Tok::Ident(s) if s == "div" => BinOp::Div,
            Tok::Ident(s) if s == "mod" => BinOp::Mod,
            Tok::Eq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::And => BinOp::And,
            Tok::Or => BinOp::Or,
            Tok::Implies => BinOp::Implies,
            Tok::Iff => BinOp::Iff,
            _ => return None,
        })
    }

    fn expr(&mut self, min: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.prefix()?;
        while let Some(op) = self.binop() {
            let p = op.prec();
            if p < min {
                break;
            }
            let pos = self.bump().pos;
            let next = if op.assoc() == Assoc::Right { p } else { p + 1 };
            let rhs = self.expr(next)?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), pos);
            if op.assoc() == Assoc::None && self.binop().is_some_and(|o| o.prec() == p) {
                return Err(self.error("comparisons do not chain; add parentheses"));
            }
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                let e = self.expr(NOT_PREC)?;
                Ok(Expr::new(ExprKind::Not(Box::new(e)), pos))
            }
            Tok::Minus => {
                self.bump();
                if let Tok::Int(n) = self.peek().clone() {
                    self.bump();
                    return Ok(Expr::new(ExprKind::Int(-n), pos));
                }
                let e = self.expr(NEG_PREC)?;
                Ok(Expr::new(ExprKind::Neg(Box::new(e)), pos))
            }
            Tok::LParen => {
                self.bump();
                let mut e = self.expr(0)?;
                self.expect(Tok::RParen)?;
                e.pos = pos;
                Ok(e)
            }
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::new(ExprKind::Int(n), pos))
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Expr::new(ExprKind::Bool(s == "true"), pos))
            }
            Tok::Ident(s) if s == "exists" || s == "forall" => {
                self.bump();
                let q = if s == "exists" { Quantifier::Exists } else { Quantifier::Forall };
                let mut binders = vec![self.binder()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    binders.push(self.binder()?);
                }
                self.expect(Tok::Dot)?;
                let body = self.expr(0)?;
                Ok(Expr::new(ExprKind::Quant(q, binders, Box::new(body)), pos))
            }
            Tok::Ident(_) => {
                let name = self.ident()?.name;
                if *self.peek() != Tok::LParen {
                    return Ok(Expr::new(ExprKind::Name(name), pos));
                }
                self.bump();
                let mut args = Vec::new();
                if *self.peek() != Tok::RParen {
                    args.push(self.expr(0)?);
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.expr(0)?);
                    }
                }
                self.expect(Tok::RParen)?;
                Ok(Expr::new(ExprKind::App(name, args), pos))
            }
            _ => Err(self.unexpected("an expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::new(ExprKind::Binary(op, Box::new(a), Box::new(b)), Pos::default())
    }

    fn name(s: &str) -> Expr {
        Expr::new(ExprKind::Name(s.into()), Pos::default())
    }

    #[test]
    fn connective_precedence() {
        let (a, b, c) = (name("a"), name("b"), name("c"));
        assert_eq!(e("a /\\ b \\/ c"), bin(BinOp::Or, bin(BinOp::And, a.clone(), b.clone()), c.clone()));
        assert_eq!(e("a -> b -> c"), bin(BinOp::Implies, a.clone(), bin(BinOp::Implies, b.clone(), c.clone())));
        assert_eq!(e("a <-> b \\/ c"), bin(BinOp::Iff, a.clone(), bin(BinOp::Or, b.clone(), c.clone())));
        let not_a = Expr::new(ExprKind::Not(Box::new(a.clone())), Pos::default());
        assert_eq!(e("~a /\\ b"), bin(BinOp::And, not_a, b.clone()));
        assert_eq!(e("x + y * z"), bin(BinOp::Add, name("x"), bin(BinOp::Mul, name("y"), name("z"))));
        assert_eq!(e("x - y - z"), bin(BinOp::Sub, bin(BinOp::Sub, name("x"), name("y")), name("z")));
    }

    #[test]
    fn quantifier_body_extends_right() {
        let ExprKind::Binary(BinOp::And, _, q) = e("p /\\ exists u:Int. 1 < u /\\ u < n").kind else { panic!() };
        let ExprKind::Quant(Quantifier::Exists, bs, body) = q.kind else { panic!() };
        assert_eq!(bs[0].name.name, "u");
        assert!(matches!(body.kind, ExprKind::Binary(BinOp::And, ..)));
    }

    #[test]
    fn negative_literals_fold() {
        assert_eq!(e("-3").kind, ExprKind::Int((-3).into()));
        assert!(matches!(e("-(3)").kind, ExprKind::Neg(_)));
        assert!(matches!(e("- x").kind, ExprKind::Neg(_)));
    }

    #[test]
    fn chained_comparison_is_rejected() {
        assert!(parse_expr("1 < x < 3").is_err());
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(parse_spec("").is_err());
        assert!(parse_spec("  // only a comment\n").is_err());
    }

    #[test]
    fn error_positions() {
        let err = parse_spec("sorts Cfg;\nsymbols\n  init : Int Cfg;").unwrap_err();
        assert_eq!((err.pos.line, err.pos.col), (3, 14));
        let err = parse_spec("rules f(x) => ;").unwrap_err();
        assert_eq!((err.pos.line, err.pos.col), (1, 15));
    }

    #[test]
    fn goal_with_splits() {
        let f = parse_spec("prove f(n) /\\ n > 0 => g /\\ true split n > 5 split n = 1;").unwrap();
        let Section::Goal(g) = &f.sections[0] else { panic!() };
        assert_eq!(g.kind, GoalKind::Prove);
        assert_eq!(g.splits.len(), 2);
        assert_eq!(g.rhs.constraint.kind, ExprKind::Bool(true));
    }
}
