//! Ground rewriting and bounded transition graphs.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write};
use std::hash::Hash;

use super::eval::{match_ground, normalize, Env, Evaluator};
use super::{Domain, OracleError};
use crate::constraints::Formula;
use crate::lctrs::Lctrs;
use crate::par::Exec;
use crate::terms::{Op, Term, Var};

/// All one-step successors of the ground term `g`. Rule variables bound by
/// matching or fixed by a guard equation take their determined value; the
/// others range over the domain.
pub fn ground_step(r: &Lctrs, g: &Term, dom: &Domain) -> Result<BTreeSet<Term>, OracleError> {
    let ev = Evaluator {
        sig: r.signature(),
        dom: *dom,
    };
    let mut out = BTreeSet::new();
    let mut err = None;
    for p in g.non_variable_positions() {
        let sub = g.subterm_at(&p).expect("own position");
        if !matches!(sub, Term::App(Op::Ctor(_), _)) {
            continue;
        }
        for rule in r.rules() {
            let mut env = Env::new();
            let mut eqs = Vec::new();
            if !match_ground(&rule.lhs, sub, &mut env, &mut eqs) {
                continue;
            }
            let cond = Formula::and(
                eqs.into_iter()
                    .map(|(a, b)| Formula::eq(a, b))
                    .chain(std::iter::once(rule.guard.clone())),
            );
            let mut vars: BTreeSet<Var> = cond.free_vars();
            vars.extend(rule.rhs.vars());
            let vars: Vec<Var> = vars.into_iter().collect();
            ev.solutions(&cond, &vars, &env, false, &mut |sol| match normalize(&rule.rhs, sol) {
                Ok(rhs) => {
                    out.insert(g.replace_unchecked(&p, rhs));
                }
                Err(e) => err = Some(e),
            })?;
        }
    }
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// A finite transition graph over nodes of type `N`. Nodes in
/// `frontier_exceeded` have successors that were not explored.
#[derive(Clone, Debug)]
pub struct TransitionGraph<N> {
    nodes: Vec<N>,
    index: HashMap<N, usize>,
    succ: Vec<BTreeSet<usize>>,
    pub frontier_exceeded: BTreeSet<usize>,
}

impl<N: Eq + Hash> PartialEq for TransitionGraph<N> {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.succ == other.succ && self.frontier_exceeded == other.frontier_exceeded
    }
}

impl<N: Eq + Hash> Eq for TransitionGraph<N> {}

impl<N: Clone + Eq + Hash> Default for TransitionGraph<N> {
    fn default() -> Self {
        TransitionGraph {
            nodes: Vec::new(),
            index: HashMap::new(),
            succ: Vec::new(),
            frontier_exceeded: BTreeSet::new(),
        }
    }
}

impl<N: Clone + Eq + Hash> TransitionGraph<N> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, n: N) -> usize {
        if let Some(&i) = self.index.get(&n) {
            return i;
        }
        let i = self.nodes.len();
        self.nodes.push(n.clone());
        self.index.insert(n, i);
        self.succ.push(BTreeSet::new());
        i
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        self.succ[a].insert(b);
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: usize) -> &N {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[N] {
        &self.nodes
    }

    pub fn id(&self, n: &N) -> Option<usize> {
        self.index.get(n).copied()
    }

    pub fn successors(&self, i: usize) -> &BTreeSet<usize> {
        &self.succ[i]
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(BTreeSet::len).sum()
    }

    pub fn is_frontier(&self, i: usize) -> bool {
        self.frontier_exceeded.contains(&i)
    }

    /// No successors and nothing left unexplored.
    pub fn is_irreducible(&self, i: usize) -> bool {
        self.succ[i].is_empty() && !self.is_frontier(i)
    }

    pub fn ids<'a>(&self, ns: impl IntoIterator<Item = &'a N>) -> BTreeSet<usize>
    where
        N: 'a,
    {
        ns.into_iter().filter_map(|n| self.id(n)).collect()
    }
}

impl<N: Clone + Eq + Hash + fmt::Display> TransitionGraph<N> {
    /// Plain-text form: `node`, `edge`, `frontier`, `P` and `Q` lines.
    pub fn to_edge_list(&self, p: &BTreeSet<usize>, q: &BTreeSet<usize>) -> String {
        let mut out = String::new();
        for (i, n) in self.nodes.iter().enumerate() {
            writeln!(out, "node {i} {n}").unwrap();
        }
        for (i, ss) in self.succ.iter().enumerate() {
            for j in ss {
                writeln!(out, "edge {i} {j}").unwrap();
            }
        }
        for i in &self.frontier_exceeded {
            writeln!(out, "frontier {i}").unwrap();
        }
        for i in p {
            writeln!(out, "P {i}").unwrap();
        }
        for i in q {
            writeln!(out, "Q {i}").unwrap();
        }
        out
    }

    pub fn to_dot(&self, p: &BTreeSet<usize>, q: &BTreeSet<usize>) -> String {
        let mut out = String::from("digraph transitions {\n  node [shape=ellipse];\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let label = n.to_string().replace('\\', "\\\\").replace('"', "\\\"");
            let mut attrs = vec![format!("label=\"{label}\"")];
            if p.contains(&i) {
                attrs.push("shape=box".into());
            }
            if q.contains(&i) {
                attrs.push("peripheries=2".into());
            }
            if self.is_frontier(i) {
                attrs.push("style=dashed".into());
            }
            writeln!(out, "  n{i} [{}];", attrs.join(", ")).unwrap();
        }
        for (i, ss) in self.succ.iter().enumerate() {
            for j in ss {
                writeln!(out, "  n{i} -> n{j};").unwrap();
            }
        }
        out.push_str("}\n");
        out
    }
}

/// A graph read back from its edge-list form, with its `P` and `Q` sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeListGraph {
    pub graph: TransitionGraph<String>,
    pub p: BTreeSet<usize>,
    pub q: BTreeSet<usize>,
}

/// Parses the edge-list form. Node ids must be `0..n` in order; `edge`,
/// `frontier`, `P` and `Q` lines may also mention ids without a `node`
/// line, which are then labelled by their id.
pub fn parse_edge_list(text: &str) -> Result<EdgeListGraph, String> {
    let mut labels: BTreeMap<usize, String> = BTreeMap::new();
    let mut edges = Vec::new();
    let mut frontier = Vec::new();
    let mut p = BTreeSet::new();
    let mut q = BTreeSet::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.splitn(3, char::is_whitespace);
        let kw = parts.next().unwrap_or_default();
        let id = |s: Option<&str>| -> Result<usize, String> {
            s.and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| format!("line {}: expected a node id", ln + 1))
        };
        match kw {
            "node" => {
                let i = id(parts.next())?;
                labels.insert(i, parts.next().unwrap_or_default().trim().to_string());
            }
            "edge" => {
                let a = id(parts.next())?;
                let b = id(parts.next())?;
                edges.push((a, b));
            }
            "frontier" => frontier.push(id(parts.next())?),
            "P" => {
                p.insert(id(parts.next())?);
            }
            "Q" => {
                q.insert(id(parts.next())?);
            }
            other => return Err(format!("line {}: unknown directive '{other}'", ln + 1)),
        }
    }
    let max = labels
        .keys()
        .chain(edges.iter().flat_map(|(a, b)| [a, b]))
        .chain(frontier.iter())
        .chain(p.iter())
        .chain(q.iter())
        .max()
        .copied();
    let mut graph = TransitionGraph::new();
    if let Some(max) = max {
        for i in 0..=max {
            let label = labels.get(&i).cloned().unwrap_or_else(|| i.to_string());
            if graph.add_node(label.clone()) != i {
                return Err(format!("duplicate node label '{label}'"));
            }
        }
    }
    for (a, b) in edges {
        graph.add_edge(a, b);
    }
    graph.frontier_exceeded.extend(frontier);
    Ok(EdgeListGraph { graph, p, q })
}

/// Breadth-first closure of [`ground_step`] from `seeds`. Nodes `steps`
/// edges away from every seed are not expanded, and nodes with a
/// successor outside the domain keep only their in-domain successors;
/// both are marked as frontier.
pub fn build_graph(
    r: &Lctrs,
    seeds: &BTreeSet<Term>,
    dom: &Domain,
    steps: usize,
    exec: Exec,
) -> Result<TransitionGraph<Term>, OracleError> {
    let mut g = TransitionGraph::new();
    let mut layer: Vec<usize> = seeds.iter().map(|s| g.add_node(s.clone())).collect();
    let mut seen: BTreeSet<usize> = layer.iter().copied().collect();
    for depth in 0..=steps {
        if layer.is_empty() {
            break;
        }
        let terms: Vec<Term> = layer.iter().map(|&i| g.node(i).clone()).collect();
        let succs = exec.map(&terms, |t| ground_step(r, t, dom));
        let mut next = Vec::new();
        for (&i, s) in layer.iter().zip(succs) {
            let s = s?;
            if depth == steps {
                if !s.is_empty() {
                    g.frontier_exceeded.insert(i);
                }
                continue;
            }
            for t in s {
                if !dom.contains(&t) {
                    g.frontier_exceeded.insert(i);
                    continue;
                }
                let j = g.add_node(t);
                g.add_edge(i, j);
                if seen.insert(j) {
                    next.push(j);
                }
            }
        }
        layer = next;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lctrs::tests::{comp, compositeness, init, looop};

    fn t(n: i64) -> Term {
        Term::int(n)
    }

    #[test]
    fn ground_step_examples() {
        let r = compositeness();
        let d = Domain::new(12);
        assert_eq!(ground_step(&r, &init(t(4)), &d).unwrap(), BTreeSet::from([looop(t(4), t(2))]));
        assert_eq!(ground_step(&r, &looop(t(4), t(2)), &d).unwrap(), BTreeSet::from([comp()]));
        assert!(ground_step(&r, &comp(), &d).unwrap().is_empty());
        assert_eq!(ground_step(&r, &looop(t(5), t(2)), &d).unwrap(), BTreeSet::from([looop(t(5), t(3))]));
    }

    #[test]
    fn graph_examples() {
        let r = compositeness();
        let d = Domain::new(12);
        let g = build_graph(&r, &BTreeSet::from([init(t(4))]), &d, 10, Exec::Sequential).unwrap();
        assert_eq!(g.nodes(), &[init(t(4)), looop(t(4), t(2)), comp()]);
        assert!(g.is_irreducible(2));
        assert!(g.frontier_exceeded.is_empty());

        let empty = build_graph(&r, &BTreeSet::new(), &d, 10, Exec::Sequential).unwrap();
        assert!(empty.is_empty());

        let g = build_graph(&r, &BTreeSet::from([init(t(5))]), &d, 3, Exec::Sequential).unwrap();
        let last = g.id(&looop(t(5), t(4))).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.frontier_exceeded, BTreeSet::from([last]));
    }

    #[test]
    fn leaving_the_domain_marks_frontier() {
        let r = compositeness();
        let d = Domain::new(5);
        let g = build_graph(&r, &BTreeSet::from([init(t(5))]), &d, 50, Exec::Sequential).unwrap();
        let l5 = g.id(&looop(t(5), t(5))).unwrap();
        assert!(g.is_frontier(l5));
        assert!(g.successors(l5).is_empty());
    }

    #[test]
    fn sequential_and_parallel_graphs_agree() {
        let r = compositeness();
        let d = Domain::new(12);
        let seeds: BTreeSet<Term> = (-12..=12).map(|n| init(t(n))).collect();
        let a = build_graph(&r, &seeds, &d, 30, Exec::Sequential).unwrap();
        let b = build_graph(&r, &seeds, &d, 30, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn edge_list_round_trip() {
        let r = compositeness();
        let g = build_graph(&r, &BTreeSet::from([init(t(6)), init(t(7))]), &Domain::new(12), 4, Exec::Sequential).unwrap();
        let p = BTreeSet::from([0, 1]);
        let q = g.ids([&comp()]);
        let text = g.to_edge_list(&p, &q);
        let back = parse_edge_list(&text).unwrap();
        assert_eq!(back.graph.len(), g.len());
        assert_eq!(back.graph.edge_count(), g.edge_count());
        assert_eq!(back.graph.frontier_exceeded, g.frontier_exceeded);
        assert_eq!((back.p, back.q), (p.clone(), q.clone()));
        assert!(g.to_dot(&p, &q).starts_with("digraph"));
    }
}
