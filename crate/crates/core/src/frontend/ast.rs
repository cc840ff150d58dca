//! Surface syntax of spec files, before name resolution.

use num_bigint::BigInt;

/// A source position. Positions never take part in equality, so two trees
/// that differ only in layout compare equal.
#[derive(Clone, Copy, Debug, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Pos {
        Pos { line, col }
    }
}

impl PartialEq for Pos {
    fn eq(&self, _: &Pos) -> bool {
        true
    }
}

impl Eq for Pos {}

impl std::fmt::Display for Pos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub pos: Pos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Implies,
    Iff,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Assoc {
    Left,
    Right,
    None,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "div",
            BinOp::Mod => "mod",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "/\\",
            BinOp::Or => "\\/",
            BinOp::Implies => "->",
            BinOp::Iff => "<->",
        }
    }

    /// Binding strength; larger binds tighter. `~` sits at 5 and unary
    /// minus at 9.
    pub fn prec(self) -> u8 {
        match self {
            BinOp::Iff => 1,
            BinOp::Implies => 2,
            BinOp::Or => 3,
            BinOp::And => 4,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 6,
            BinOp::Add | BinOp::Sub => 7,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 8,
        }
    }

    pub fn assoc(self) -> Assoc {
        match self.prec() {
            1 | 2 => Assoc::Right,
            6 => Assoc::None,
            _ => Assoc::Left,
        }
    }
}

pub const NOT_PREC: u8 = 5;
pub const NEG_PREC: u8 = 9;
pub const ATOM_PREC: u8 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    pub fn keyword(self) -> &'static str {
        match self {
            Quantifier::Exists => "exists",
            Quantifier::Forall => "forall",
        }
    }
}

/// A typed binder `x : S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binder {
    pub name: Ident,
    pub sort: Ident,
}

/// Terms and formulas share one expression syntax; resolution decides
/// which is which.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Int(BigInt),
    Bool(bool),
    /// A variable or a constant symbol.
    Name(String),
    App(String, Vec<Expr>),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Quant(Quantifier, Vec<Binder>, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

impl Expr {
    pub fn new(kind: ExprKind, pos: Pos) -> Expr {
        Expr { kind, pos }
    }

    pub fn prec(&self) -> u8 {
        match &self.kind {
            ExprKind::Binary(op, ..) => op.prec(),
            ExprKind::Not(_) => NOT_PREC,
            ExprKind::Neg(_) => NEG_PREC,
            _ => ATOM_PREC,
        }
    }
}

/// `term /\ formula`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CTermExpr {
    pub term: Expr,
    pub constraint: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolSpec {
    pub name: Ident,
    pub args: Vec<Ident>,
    pub result: Ident,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSpec {
    pub lhs: Expr,
    pub rhs: Expr,
    pub guard: Option<Expr>,
    pub pos: Pos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GoalKind {
    Prove,
    Circ,
}

impl GoalKind {
    pub fn keyword(self) -> &'static str {
        match self {
            GoalKind::Prove => "prove",
            GoalKind::Circ => "circ",
        }
    }
}

/// `prove lhs => rhs split χ ... ;`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoalSpec {
    pub kind: GoalKind,
    pub lhs: CTermExpr,
    pub rhs: CTermExpr,
    pub splits: Vec<Expr>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OptionValue {
    Int(BigInt),
    Bool(bool),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptionSpec {
    pub key: Ident,
    pub value: OptionValue,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Section {
    Sorts(Vec<Ident>),
    Subsort(Ident, Ident),
    Symbols(Vec<SymbolSpec>),
    Vars(Vec<Binder>),
    Rules(Vec<RuleSpec>),
    Goal(GoalSpec),
    Options(Vec<OptionSpec>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecFile {
    pub sections: Vec<Section>,
}

pub const KEYWORDS: [&str; 16] = [
    "sorts", "subsort", "symbols", "vars", "rules", "prove", "circ", "options", "if", "split", "exists", "forall",
    "true", "false", "div", "mod",
];

pub const SECTION_KEYWORDS: [&str; 8] = ["sorts", "subsort", "symbols", "vars", "rules", "prove", "circ", "options"];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}
