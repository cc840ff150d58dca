//! Demonic validity on finite graphs, and path satisfaction.

use std::collections::BTreeSet;
use std::hash::Hash;

use serde::Serialize;
use thiserror::Error;

use super::graph::TransitionGraph;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum DvpVerdict {
    Valid,
    /// `witness` is a P-node and `path` a run from it that gets stuck
    /// outside Q.
    Invalid { witness: usize, path: Vec<usize> },
    /// Validity depends on the unexplored successors of `frontier`.
    Inconclusive { frontier: usize },
}

impl DvpVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            DvpVerdict::Valid => "valid",
            DvpVerdict::Invalid { .. } => "invalid",
            DvpVerdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// Nodes removed by the greatest-fixed-point iteration, with their removal
/// round. Frontier nodes outside `q` are removed immediately when
/// `pessimistic`, and otherwise only when a known successor is removed.
fn removal_rounds<N: Clone + Eq + Hash>(
    g: &TransitionGraph<N>,
    q: &BTreeSet<usize>,
    pessimistic: bool,
) -> Vec<Option<usize>> {
    let n = g.len();
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for &j in g.successors(i) {
            pred[j].push(i);
        }
    }
    let mut round: Vec<Option<usize>> = vec![None; n];
    let mut layer: Vec<usize> = (0..n)
        .filter(|&i| !q.contains(&i) && (g.is_irreducible(i) || (pessimistic && g.is_frontier(i))))
        .collect();
    for &i in &layer {
        round[i] = Some(0);
    }
    let mut r = 0;
    while !layer.is_empty() {
        r += 1;
        let mut next = Vec::new();
        for &j in &layer {
            for &i in &pred[j] {
                if round[i].is_none() && !q.contains(&i) {
                    round[i] = Some(r);
                    next.push(i);
                }
            }
        }
        layer = next;
    }
    round
}

/// Decides whether every run from `p` is infinite or reaches `q`, by
/// iterated removal of nodes that are stuck outside `q` or have a removed
/// successor.
pub fn check_dvp<N: Clone + Eq + Hash>(g: &TransitionGraph<N>, p: &BTreeSet<usize>, q: &BTreeSet<usize>) -> DvpVerdict {
    let optimistic = removal_rounds(g, q, false);
    if let Some(&w) = p.iter().find(|&&i| optimistic[i].is_some()) {
        let mut path = vec![w];
        let mut cur = w;
        while let Some(r) = optimistic[cur].filter(|&r| r > 0) {
            cur = *g
                .successors(cur)
                .iter()
                .find(|&&j| optimistic[j] == Some(r - 1))
                .expect("removed node has a successor removed one round earlier");
            path.push(cur);
        }
        return DvpVerdict::Invalid { witness: w, path };
    }
    let pessimistic = removal_rounds(g, q, true);
    if let Some(&w) = p.iter().find(|&&i| pessimistic[i].is_some()) {
        let mut cur = w;
        while let Some(r) = pessimistic[cur].filter(|&r| r > 0) {
            cur = *g
                .successors(cur)
                .iter()
                .find(|&&j| pessimistic[j] == Some(r - 1))
                .expect("removed node has a successor removed one round earlier");
        }
        return DvpVerdict::Inconclusive { frontier: cur };
    }
    DvpVerdict::Valid
}

/// An execution path: finite and ending in an irreducible node, or a
/// stem followed by a cycle repeated forever.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Path {
    Finite(Vec<usize>),
    Lasso { stem: Vec<usize>, cycle: Vec<usize> },
}

impl Path {
    pub fn head(&self) -> Option<usize> {
        match self {
            Path::Finite(xs) => xs.first().copied(),
            Path::Lasso { stem, cycle } => stem.first().or(cycle.first()).copied(),
        }
    }

    pub fn nodes(&self) -> Vec<usize> {
        match self {
            Path::Finite(xs) => xs.clone(),
            Path::Lasso { stem, cycle } => stem.iter().chain(cycle).copied().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("malformed path: {0}")]
    MalformedPath(String),
}

fn check_edges<N: Clone + Eq + Hash>(g: &TransitionGraph<N>, xs: &[usize]) -> Result<(), PathError> {
    if let Some(&bad) = xs.iter().find(|&&x| x >= g.len()) {
        return Err(PathError::MalformedPath(format!("unknown node {bad}")));
    }
    for w in xs.windows(2) {
        if !g.successors(w[0]).contains(&w[1]) {
            return Err(PathError::MalformedPath(format!("no edge {} -> {}", w[0], w[1])));
        }
    }
    Ok(())
}

/// Whether `path` satisfies `p ⇒ q`: it starts in `p` and either reaches
/// `q` or is infinite.
pub fn path_satisfies<N: Clone + Eq + Hash>(
    g: &TransitionGraph<N>,
    path: &Path,
    p: &BTreeSet<usize>,
    q: &BTreeSet<usize>,
) -> Result<bool, PathError> {
    match path {
        Path::Finite(xs) => {
            check_edges(g, xs)?;
            let last = *xs.last().ok_or_else(|| PathError::MalformedPath("empty path".into()))?;
            if !g.is_irreducible(last) {
                return Err(PathError::MalformedPath(format!("path ends at reducible node {last}")));
            }
        }
        Path::Lasso { stem, cycle } => {
            if cycle.is_empty() {
                return Err(PathError::MalformedPath("empty cycle".into()));
            }
            let all: Vec<usize> = stem.iter().chain(cycle).copied().collect();
            check_edges(g, &all)?;
            check_edges(g, &[cycle[cycle.len() - 1], cycle[0]])?;
        }
    }
    let head = path.head().expect("non-empty path");
    if !p.contains(&head) {
        return Ok(false);
    }
    Ok(match path {
        Path::Finite(xs) => xs.iter().any(|x| q.contains(x)),
        Path::Lasso { .. } => true,
    })
}

/// Outcome of enumerating every path from `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathSearch {
    pub paths: usize,
    pub failing: Option<Path>,
    /// A simple path from `p` that reaches a frontier node before `q`.
    pub truncated: Option<Vec<usize>>,
}

impl PathSearch {
    pub fn label(&self) -> &'static str {
        match (&self.failing, &self.truncated) {
            (Some(_), _) => "invalid",
            (None, Some(_)) => "inconclusive",
            (None, None) => "valid",
        }
    }
}

/// Enumerates the maximal simple paths and lassos from `p`, stopping each
/// at its first `q` node, and checks each with [`path_satisfies`]. Paths
/// that revisit a node outside a final cycle need not be enumerated: their
/// node sets are covered by simple paths and lassos. Returns `None` when
/// more than `limit` paths would be needed.
pub fn exhaustive_paths<N: Clone + Eq + Hash>(
    g: &TransitionGraph<N>,
    p: &BTreeSet<usize>,
    q: &BTreeSet<usize>,
    limit: usize,
) -> Option<PathSearch> {
    let mut res = PathSearch {
        paths: 0,
        failing: None,
        truncated: None,
    };
    for &s in p {
        let mut stack = vec![s];
        let mut on_path = vec![false; g.len()];
        on_path[s] = true;
        if !dfs(g, p, q, &mut stack, &mut on_path, &mut res, limit) {
            return None;
        }
    }
    Some(res)
}

fn dfs<N: Clone + Eq + Hash>(
    g: &TransitionGraph<N>,
    p: &BTreeSet<usize>,
    q: &BTreeSet<usize>,
    stack: &mut Vec<usize>,
    on_path: &mut [bool],
    res: &mut PathSearch,
    limit: usize,
) -> bool {
    let cur = *stack.last().expect("non-empty");
    let record = |res: &mut PathSearch, path: Path| {
        res.paths += 1;
        let ok = path_satisfies(g, &path, p, q).expect("enumerated paths are well formed");
        if !ok && res.failing.is_none() {
            res.failing = Some(path);
        }
        res.paths <= limit
    };
    if q.contains(&cur) {
        res.paths += 1;
        return res.paths <= limit;
    }
    if g.is_frontier(cur) && res.truncated.is_none() {
        res.truncated = Some(stack.clone());
    }
    if g.is_irreducible(cur) {
        return record(res, Path::Finite(stack.clone()));
    }
    for &j in g.successors(cur) {
        if on_path[j] {
            let at = stack.iter().position(|&x| x == j).expect("on path");
            let lasso = Path::Lasso {
                stem: stack[..at].to_vec(),
                cycle: stack[at..].to_vec(),
            };
            if !record(res, lasso) {
                return false;
            }
            continue;
        }
        stack.push(j);
        on_path[j] = true;
        let ok = dfs(g, p, q, stack, on_path, res, limit);
        on_path[j] = false;
        stack.pop();
        if !ok {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)], frontier: &[usize]) -> TransitionGraph<usize> {
        let mut g = TransitionGraph::new();
        for i in 0..n {
            g.add_node(i);
        }
        for &(a, b) in edges {
            g.add_edge(a, b);
        }
        g.frontier_exceeded.extend(frontier.iter().copied());
        g
    }

    fn set(xs: &[usize]) -> BTreeSet<usize> {
        xs.iter().copied().collect()
    }

    #[test]
    fn subsumption_and_stuck() {
        let g = graph(3, &[(0, 1)], &[]);
        assert_eq!(check_dvp(&g, &set(&[2]), &set(&[2])), DvpVerdict::Valid);
        assert_eq!(
            check_dvp(&g, &set(&[2]), &set(&[1])),
            DvpVerdict::Invalid {
                witness: 2,
                path: vec![2]
            }
        );
        assert_eq!(
            check_dvp(&g, &set(&[0]), &set(&[2])),
            DvpVerdict::Invalid {
                witness: 0,
                path: vec![0, 1]
            }
        );
    }

    #[test]
    fn infinite_runs_are_valid() {
        let g = graph(3, &[(0, 1), (1, 0), (1, 2)], &[]);
        assert_eq!(check_dvp(&g, &set(&[0]), &set(&[2])), DvpVerdict::Valid);
        assert!(matches!(check_dvp(&g, &set(&[0]), &set(&[])), DvpVerdict::Invalid { .. }));
    }

    #[test]
    fn frontier_is_inconclusive() {
        let g = graph(3, &[(0, 1), (0, 2)], &[1]);
        assert_eq!(check_dvp(&g, &set(&[0]), &set(&[2])), DvpVerdict::Inconclusive { frontier: 1 });
        let g = graph(4, &[(0, 1), (0, 3)], &[1]);
        assert!(matches!(check_dvp(&g, &set(&[0]), &set(&[2])), DvpVerdict::Invalid { .. }));
    }

    #[test]
    fn path_examples() {
        let g = graph(3, &[(0, 1), (1, 2)], &[]);
        assert!(path_satisfies(&g, &Path::Finite(vec![0, 1, 2]), &set(&[0]), &set(&[2])).unwrap());
        assert!(path_satisfies(&g, &Path::Finite(vec![2]), &set(&[2]), &set(&[2])).unwrap());
        assert!(!path_satisfies(&g, &Path::Finite(vec![0, 1, 2]), &set(&[1]), &set(&[2])).unwrap());
        assert!(path_satisfies(&g, &Path::Finite(vec![0, 2]), &set(&[0]), &set(&[2])).is_err());
        assert!(path_satisfies(&g, &Path::Finite(vec![0, 1]), &set(&[0]), &set(&[2])).is_err());
        let c = graph(2, &[(0, 1), (1, 1)], &[]);
        let lasso = Path::Lasso {
            stem: vec![0],
            cycle: vec![1],
        };
        assert!(path_satisfies(&c, &lasso, &set(&[0]), &set(&[])).unwrap());
    }

    #[test]
    fn exhaustive_agrees_on_small_cases() {
        let g = graph(5, &[(0, 1), (1, 2), (2, 1), (0, 3), (3, 4)], &[]);
        for q in [set(&[]), set(&[4]), set(&[3]), set(&[2, 4])] {
            let d = check_dvp(&g, &set(&[0]), &q);
            let e = exhaustive_paths(&g, &set(&[0]), &q, 1000).unwrap();
            assert_eq!(d.label(), e.label(), "q={q:?}");
        }
    }
}
