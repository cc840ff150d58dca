use std::fmt;

use num_bigint::BigInt;

use super::ast::Pos;
use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(BigInt),
    LParen,
    RParen,
    Comma,
    Semi,
    Colon,
    Dot,
    /// `=>`
    Arrow,
    /// `->`
    Implies,
    /// `<->`
    Iff,
    And,
    Or,
    Not,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::Int(n) => return write!(f, "`{n}`"),
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Dot => ".",
            Tok::Arrow => "=>",
            Tok::Implies => "->",
            Tok::Iff => "<->",
            Tok::And => "/\\",
            Tok::Or => "\\/",
            Tok::Not => "~",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Eof => return f.write_str("end of input"),
        };
        write!(f, "`{s}`")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

/// Splits `src` into tokens. `//` starts a comment that runs to the end of
/// the line. The result always ends with `Eof`.
pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1u32, 1u32);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos::new(line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            Tok::Int(digits.parse().expect("decimal digits"))
        } else {
            let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
            let (tok, len) = [
                ("<->", Tok::Iff),
                ("=>", Tok::Arrow),
                ("->", Tok::Implies),
                ("/\\", Tok::And),
                ("\\/", Tok::Or),
                ("!=", Tok::Ne),
                ("<=", Tok::Le),
                (">=", Tok::Ge),
                ("(", Tok::LParen),
                (")", Tok::RParen),
                (",", Tok::Comma),
                (";", Tok::Semi),
                (":", Tok::Colon),
                (".", Tok::Dot),
                ("~", Tok::Not),
                ("=", Tok::Eq),
                ("<", Tok::Lt),
                (">", Tok::Gt),
                ("+", Tok::Plus),
                ("-", Tok::Minus),
                ("*", Tok::Star),
            ]
            .into_iter()
            .find(|(s, _)| rest.starts_with(s))
            .map(|(s, t)| (t, s.len()))
            .ok_or_else(|| ParseError::new(pos, format!("unexpected character `{c}`")))?;
            i += len;
            tok
        };
        col += (i - start) as u32;
        out.push(Token { tok, pos });
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos::new(line, col),
    });
    Ok(out)
}
