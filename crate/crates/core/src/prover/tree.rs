//! Proof trees, audits and rendering.

use std::fmt::{self, Write};

use serde::Serialize;

use crate::constraints::Formula;
use crate::lctrs::ReachabilityFormula;
use crate::smt::{SatChecker, SmtError, Validity, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum NodeKind {
    #[serde(rename = "axiom")]
    Axiom,
    #[serde(rename = "subs")]
    Subs,
    #[serde(rename = "der-forall")]
    DerForall,
    #[serde(rename = "circ")]
    Circ,
    #[serde(rename = "disj")]
    Disj,
    #[serde(rename = "open")]
    Open,
}

impl NodeKind {
    pub fn name(self) -> &'static str {
        match self {
            NodeKind::Axiom => "axiom",
            NodeKind::Subs => "subs",
            NodeKind::DerForall => "der-forall",
            NodeKind::Circ => "circ",
            NodeKind::Disj => "disj",
            NodeKind::Open => "open",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Query {
    Sat,
    Valid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Sat,
    Unsat,
    Valid,
    Invalid,
    Unknown,
}

impl From<Verdict> for Answer {
    fn from(v: Verdict) -> Answer {
        match v {
            Verdict::Sat => Answer::Sat,
            Verdict::Unsat => Answer::Unsat,
            Verdict::Unknown => Answer::Unknown,
        }
    }
}

impl From<Validity> for Answer {
    fn from(v: Validity) -> Answer {
        match v {
            Validity::Valid => Answer::Valid,
            Validity::Invalid => Answer::Invalid,
            Validity::Unknown => Answer::Unknown,
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Answer::Sat => "sat",
            Answer::Unsat => "unsat",
            Answer::Valid => "valid",
            Answer::Invalid => "invalid",
            Answer::Unknown => "unknown",
        })
    }
}

/// A logical side condition and the answer that justified the rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SideCondition {
    pub formula: Formula,
    pub query: Query,
    pub answer: Answer,
}

impl SideCondition {
    pub fn ask(checker: &dyn SatChecker, query: Query, formula: Formula) -> Result<SideCondition, SmtError> {
        let answer = match query {
            Query::Sat => checker.check_sat(&formula)?.into(),
            Query::Valid => checker.check_valid(&formula)?.into(),
        };
        Ok(SideCondition { formula, query, answer })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofTree {
    pub kind: NodeKind,
    pub goal: ReachabilityFormula,
    pub side_conditions: Vec<SideCondition>,
    pub children: Vec<ProofTree>,
    /// Index into the goal list for `Circ` nodes.
    pub circularity_used: Option<usize>,
}

impl ProofTree {
    pub fn open(goal: ReachabilityFormula) -> ProofTree {
        ProofTree {
            kind: NodeKind::Open,
            goal,
            side_conditions: Vec::new(),
            children: Vec::new(),
            circularity_used: None,
        }
    }

    pub fn is_closed(&self) -> bool {
        self.kind != NodeKind::Open && self.children.iter().all(ProofTree::is_closed)
    }

    /// Goals of the open leaves, left to right.
    pub fn frontier(&self) -> Vec<ReachabilityFormula> {
        let mut out = Vec::new();
        self.walk(&mut |t| {
            if t.kind == NodeKind::Open {
                out.push(t.goal.clone());
            }
        });
        out
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(ProofTree::size).sum::<usize>()
    }

    pub fn height(&self) -> usize {
        1 + self.children.iter().map(ProofTree::height).max().unwrap_or(0)
    }

    pub fn count(&self, kind: NodeKind) -> usize {
        let mut n = 0;
        self.walk(&mut |t| n += usize::from(t.kind == kind));
        n
    }

    /// Preorder traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a ProofTree)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }

    /// Checks the arity of each node kind and the shape of axiom leaves.
    pub fn structural_errors(&self) -> Vec<String> {
        let mut errs = Vec::new();
        self.walk(&mut |t| {
            let n = t.children.len();
            let ok = match t.kind {
                NodeKind::Axiom | NodeKind::Open => n == 0,
                NodeKind::Subs => n == 1 && t.children[0].kind != NodeKind::Subs,
                NodeKind::DerForall => n >= 1,
                NodeKind::Circ | NodeKind::Disj => n == 2,
            };
            if !ok {
                errs.push(format!("{} node with {n} children at {}", t.kind, t.goal));
            }
            if t.kind == NodeKind::Axiom
                && !t.side_conditions.iter().any(|c| c.query == Query::Sat && c.answer == Answer::Unsat)
            {
                errs.push(format!("axiom without an unsat condition at {}", t.goal));
            }
        });
        errs
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.text_into(&mut out, 0);
        out
    }

    fn text_into(&self, out: &mut String, indent: usize) {
        let pad = "  ".repeat(indent);
        write!(out, "{pad}[{}", self.kind).unwrap();
        if let Some(i) = self.circularity_used {
            write!(out, " #{}", i + 1).unwrap();
        }
        writeln!(out, "] {}", self.goal).unwrap();
        for c in &self.side_conditions {
            writeln!(out, "{pad}    {}: {}", c.answer, c.formula).unwrap();
        }
        for c in &self.children {
            c.text_into(out, indent + 1);
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(JsonNode::from(self)).expect("proof tree serializes")
    }
}

#[derive(Serialize)]
struct JsonCondition {
    formula: String,
    query: Query,
    verdict: Answer,
}

#[derive(Serialize)]
struct JsonNode {
    goal: String,
    rule: NodeKind,
    conditions: Vec<JsonCondition>,
    children: Vec<JsonNode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    circularity: Option<usize>,
}

impl From<&ProofTree> for JsonNode {
    fn from(t: &ProofTree) -> JsonNode {
        JsonNode {
            goal: t.goal.to_string(),
            rule: t.kind,
            conditions: t
                .side_conditions
                .iter()
                .map(|c| JsonCondition {
                    formula: c.formula.to_string(),
                    query: c.query,
                    verdict: c.answer,
                })
                .collect(),
            children: t.children.iter().map(JsonNode::from).collect(),
            circularity: t.circularity_used.map(|i| i + 1),
        }
    }
}

/// Whether every `Circ` node has a `DerForall` ancestor.
pub fn check_guarded(t: &ProofTree) -> bool {
    fn go(t: &ProofTree, guarded: bool) -> bool {
        if t.kind == NodeKind::Circ && !guarded {
            return false;
        }
        let below = guarded || t.kind == NodeKind::DerForall;
        t.children.iter().all(|c| go(c, below))
    }
    go(t, false)
}

/// Re-asks every recorded side condition and lists those whose answer
/// changed.
pub fn reverify(t: &ProofTree, checker: &dyn SatChecker) -> Result<Vec<String>, SmtError> {
    let mut conds = Vec::new();
    t.walk(&mut |n| conds.extend(n.side_conditions.iter().map(|c| (n, c))));
    let mut mismatches = Vec::new();
    for (node, c) in conds {
        let again = SideCondition::ask(checker, c.query, c.formula.clone())?;
        if again.answer != c.answer {
            mismatches.push(format!(
                "[{}] {}: recorded {}, now {} for {}",
                node.kind, node.goal, c.answer, again.answer, c.formula
            ));
        }
    }
    Ok(mismatches)
}
