// SPDX-License-Identifier: Apache-2.0
//! Partial mixed graphs: nodes, per-endpoint edge marks and ancestral relations.
//!
//! Nodes are addressed by their index in declaration order. Every edge is
//! stored once, keyed by the unordered pair, with the marks kept in
//! (smaller index, larger index) order. Ordered access goes through
//! [`Pmg::mark`], which returns the mark *at the second argument*.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// An edge mark.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mark {
    Tail,
    Arrow,
    Circle,
}

impl Mark {
    /// Tails and arrowheads are invariant, circles are variant.
    pub fn is_invariant(self) -> bool {
        self != Mark::Circle
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mark::Tail => "tail",
            Mark::Arrow => "arrow",
            Mark::Circle => "circle",
        }
    }
}

impl fmt::Display for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("empty node name")]
    EmptyName,
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge between `{0}` and `{1}`")]
    DuplicateEdge(String, String),
    #[error("no edge between `{0}` and `{1}`")]
    NoSuchEdge(String, String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("mark at `{y}` on edge {x}-{y} is {existing}, cannot set {requested}")]
    Conflict {
        x: String,
        y: String,
        existing: Mark,
        requested: Mark,
    },
}

/// A partial mixed graph. DAGs, MAGs, essential graphs and every
/// intermediate state of the rule engine use this one type.
#[derive(Clone)]
pub struct Pmg {
    names: Arc<Vec<String>>,
    index: Arc<HashMap<String, usize>>,
    adj: Arc<Vec<Vec<usize>>>,
    // marks[lo * n + hi] = (mark at lo, mark at hi), only lo < hi is used
    marks: Vec<Option<(Mark, Mark)>>,
}

impl PartialEq for Pmg {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.marks == other.marks
    }
}
impl Eq for Pmg {}

impl fmt::Debug for Pmg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::pmg::render_pmg(self))
    }
}

impl Pmg {
    /// Graph with the given nodes and no edges.
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self, GraphError> {
        let mut index = HashMap::new();
        let mut list = Vec::with_capacity(names.len());
        for (i, s) in names.iter().enumerate() {
            let s = s.as_ref();
            if s.is_empty() {
                return Err(GraphError::EmptyName);
            }
            if index.insert(s.to_string(), i).is_some() {
                return Err(GraphError::DuplicateNode(s.to_string()));
            }
            list.push(s.to_string());
        }
        let n = list.len();
        Ok(Pmg {
            names: Arc::new(list),
            index: Arc::new(index),
            adj: Arc::new(vec![Vec::new(); n]),
            marks: vec![None; n * n],
        })
    }

    /// Builds a graph from `(x, y, mark at x, mark at y)` tuples over names.
    pub fn from_edges<S: AsRef<str>>(
        names: &[S],
        edges: &[(&str, &str, Mark, Mark)],
    ) -> Result<Self, GraphError> {
        let mut g = Pmg::new(names)?;
        for &(x, y, mx, my) in edges {
            let xi = g.require(x)?;
            let yi = g.require(y)?;
            g.add_edge(xi, yi, mx, my)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<usize, GraphError> {
        self.index(name)
            .ok_or_else(|| GraphError::UnknownNode(name.to_string()))
    }

    fn slot(&self, x: usize, y: usize) -> usize {
        if x < y {
            x * self.n() + y
        } else {
            y * self.n() + x
        }
    }

    pub fn add_edge(&mut self, x: usize, y: usize, mx: Mark, my: Mark) -> Result<(), GraphError> {
        if x == y {
            return Err(GraphError::SelfLoop(self.names[x].clone()));
        }
        let s = self.slot(x, y);
        if self.marks[s].is_some() {
            return Err(GraphError::DuplicateEdge(
                self.names[x].clone(),
                self.names[y].clone(),
            ));
        }
        self.marks[s] = Some(if x < y { (mx, my) } else { (my, mx) });
        let adj = Arc::make_mut(&mut self.adj);
        for (a, b) in [(x, y), (y, x)] {
            let pos = adj[a].binary_search(&b).unwrap_err();
            adj[a].insert(pos, b);
        }
        Ok(())
    }

    pub fn remove_edge(&mut self, x: usize, y: usize) {
        let s = self.slot(x, y);
        if self.marks[s].take().is_some() {
            let adj = Arc::make_mut(&mut self.adj);
            adj[x].retain(|&v| v != y);
            adj[y].retain(|&v| v != x);
        }
    }

    pub fn adjacent(&self, x: usize, y: usize) -> bool {
        x != y && self.marks[self.slot(x, y)].is_some()
    }

    /// Neighbours of `x`, sorted by index.
    pub fn neighbors(&self, x: usize) -> &[usize] {
        &self.adj[x]
    }

    /// `(mark at x, mark at y)` for the edge between `x` and `y`.
    pub fn edge(&self, x: usize, y: usize) -> Option<(Mark, Mark)> {
        if x == y {
            return None;
        }
        self.marks[self.slot(x, y)].map(|(a, b)| if x < y { (a, b) } else { (b, a) })
    }

    /// The mark at `y` on the edge between `x` and `y`.
    pub fn mark(&self, x: usize, y: usize) -> Option<Mark> {
        self.edge(x, y).map(|(_, my)| my)
    }

    /// Mark at `y`, failing when the edge does not exist.
    pub fn try_mark(&self, x: usize, y: usize) -> Result<Mark, GraphError> {
        self.mark(x, y).ok_or_else(|| {
            GraphError::NoSuchEdge(self.names[x].clone(), self.names[y].clone())
        })
    }

    /// Sets the mark at `y` on the edge between `x` and `y`. Returns whether
    /// anything changed. Overwriting an invariant mark with a different value
    /// is a conflict.
    pub fn set_mark(&mut self, x: usize, y: usize, m: Mark) -> Result<bool, GraphError> {
        let cur = self.try_mark(x, y)?;
        if cur == m {
            return Ok(false);
        }
        if cur != Mark::Circle {
            return Err(GraphError::Conflict {
                x: self.names[x].clone(),
                y: self.names[y].clone(),
                existing: cur,
                requested: m,
            });
        }
        self.force_mark(x, y, m);
        Ok(true)
    }

    /// Sets a mark without any conflict check. The edge must exist.
    pub fn force_mark(&mut self, x: usize, y: usize, m: Mark) {
        let s = self.slot(x, y);
        let e = self.marks[s].as_mut().expect("edge exists");
        if y > x {
            e.1 = m;
        } else {
            e.0 = m;
        }
    }

    /// Copy of the graph with the mark at `y` set to `m`.
    pub fn oriented(&self, x: usize, y: usize, m: Mark) -> Result<Pmg, GraphError> {
        let mut g = self.clone();
        g.set_mark(x, y, m)?;
        Ok(g)
    }

    /// Edges as `(x, y, mark at x, mark at y)` with `x < y`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize, Mark, Mark)> {
        let n = self.n();
        let mut out = Vec::new();
        for x in 0..n {
            for &y in &self.adj[x] {
                if y > x {
                    let (a, b) = self.marks[x * n + y].expect("adjacency in sync");
                    out.push((x, y, a, b));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Same node set and the same adjacencies.
    pub fn same_skeleton(&self, other: &Pmg) -> bool {
        self.names == other.names && self.adj == other.adj
    }

    // ---- edge shape predicates ----

    /// `x *-> y`
    pub fn arrow_at(&self, x: usize, y: usize) -> bool {
        self.mark(x, y) == Some(Mark::Arrow)
    }

    /// `x *-o y`
    pub fn circle_at(&self, x: usize, y: usize) -> bool {
        self.mark(x, y) == Some(Mark::Circle)
    }

    /// `x --* y`, i.e. a tail at y on the edge with x
    pub fn tail_at(&self, x: usize, y: usize) -> bool {
        self.mark(x, y) == Some(Mark::Tail)
    }

    /// `x --> y`
    pub fn is_directed(&self, x: usize, y: usize) -> bool {
        self.edge(x, y) == Some((Mark::Tail, Mark::Arrow))
    }

    /// `x <-> y`
    pub fn is_bidirected(&self, x: usize, y: usize) -> bool {
        self.edge(x, y) == Some((Mark::Arrow, Mark::Arrow))
    }

    /// `x o-o y`
    pub fn is_nondirected(&self, x: usize, y: usize) -> bool {
        self.edge(x, y) == Some((Mark::Circle, Mark::Circle))
    }

    /// `x o-> y`
    pub fn is_partially_directed(&self, x: usize, y: usize) -> bool {
        self.edge(x, y) == Some((Mark::Circle, Mark::Arrow))
    }

    pub fn has_circles(&self) -> bool {
        self.edges()
            .iter()
            .any(|&(_, _, a, b)| a == Mark::Circle || b == Mark::Circle)
    }

    // ---- ancestral relations ----

    pub fn parents(&self, x: usize) -> Vec<usize> {
        self.adj[x]
            .iter()
            .copied()
            .filter(|&p| self.is_directed(p, x))
            .collect()
    }

    pub fn children(&self, x: usize) -> Vec<usize> {
        self.adj[x]
            .iter()
            .copied()
            .filter(|&c| self.is_directed(x, c))
            .collect()
    }

    pub fn adjacents(&self, x: usize) -> Vec<usize> {
        self.adj[x].clone()
    }

    /// Membership vector of all nodes with a directed path into `targets`
    /// (targets included).
    pub fn ancestor_mask(&self, targets: &[usize]) -> Vec<bool> {
        self.backward_closure(targets, |g, from, to| g.is_directed(from, to))
    }

    /// Membership vector of all nodes with a possibly directed path into
    /// `targets`: no edge on the path has an arrowhead at its earlier node.
    pub fn possible_ancestor_mask(&self, targets: &[usize]) -> Vec<bool> {
        self.backward_closure(targets, |g, from, to| g.mark(to, from) != Some(Mark::Arrow))
    }

    pub fn descendant_mask(&self, sources: &[usize]) -> Vec<bool> {
        self.backward_closure(sources, |g, from, to| g.is_directed(to, from))
    }

    fn backward_closure(
        &self,
        targets: &[usize],
        step: impl Fn(&Pmg, usize, usize) -> bool,
    ) -> Vec<bool> {
        let mut seen = vec![false; self.n()];
        let mut stack: Vec<usize> = Vec::new();
        for &t in targets {
            if !seen[t] {
                seen[t] = true;
                stack.push(t);
            }
        }
        while let Some(v) = stack.pop() {
            for &u in &self.adj[v] {
                if !seen[u] && step(self, u, v) {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen
    }

    pub fn ancestors(&self, x: usize) -> Vec<usize> {
        mask_to_vec(&self.ancestor_mask(&[x]))
    }

    pub fn descendants(&self, x: usize) -> Vec<usize> {
        mask_to_vec(&self.descendant_mask(&[x]))
    }

    pub fn possible_ancestors(&self, x: usize) -> Vec<usize> {
        mask_to_vec(&self.possible_ancestor_mask(&[x]))
    }

    /// A directed or almost directed cycle, if one exists. The witness is a
    /// directed path `v1 -> ... -> vk` whose closing edge has an arrowhead at
    /// `v1`.
    pub fn ancestral_violation(&self) -> Option<Vec<usize>> {
        for (x, y, _, _) in self.edges() {
            for (a, b) in [(x, y), (y, x)] {
                // closing edge a *-> b, look for b -> ... -> a
                if self.arrow_at(a, b) {
                    if let Some(path) = self.directed_path(b, a) {
                        return Some(path);
                    }
                }
            }
        }
        None
    }

    /// Shortest directed path `from -> ... -> to` with at least one edge.
    pub fn directed_path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let n = self.n();
        let mut prev = vec![usize::MAX; n];
        let mut queue = std::collections::VecDeque::new();
        prev[from] = from;
        queue.push_back(from);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v] {
                if prev[w] == usize::MAX && self.is_directed(v, w) {
                    prev[w] = v;
                    if w == to {
                        let mut path = vec![to];
                        let mut cur = to;
                        while cur != from {
                            cur = prev[cur];
                            path.push(cur);
                        }
                        path.reverse();
                        return Some(path);
                    }
                    queue.push_back(w);
                }
            }
        }
        None
    }

    pub fn is_ancestral(&self) -> bool {
        self.ancestral_violation().is_none()
    }

    /// A cycle `v1 -> v2 -> v3` closed by `v3 *-> v1`, if any.
    pub fn find_len3_cycle(&self) -> Option<[usize; 3]> {
        for v2 in 0..self.n() {
            for &v1 in &self.adj[v2] {
                if !self.is_directed(v1, v2) {
                    continue;
                }
                for &v3 in &self.adj[v2] {
                    if v3 != v1 && self.is_directed(v2, v3) && self.arrow_at(v3, v1) {
                        return Some([v1, v2, v3]);
                    }
                }
            }
        }
        None
    }

    /// Acyclic and free of circle marks and bidirected edges.
    pub fn is_dag(&self) -> bool {
        self.edges()
            .iter()
            .all(|&(_, _, a, b)| matches!((a, b), (Mark::Tail, Mark::Arrow) | (Mark::Arrow, Mark::Tail)))
            && self.is_ancestral()
    }

    /// No circle marks.
    pub fn is_mixed(&self) -> bool {
        !self.has_circles()
    }

    // ---- derived graphs ----

    /// Every edge replaced by `o-o`.
    pub fn skeleton(&self) -> Pmg {
        let mut g = self.clone();
        for m in g.marks.iter_mut().flatten() {
            *m = (Mark::Circle, Mark::Circle);
        }
        g
    }

    /// Only the `o-o` edges, all nodes kept.
    pub fn circle_component(&self) -> Pmg {
        let mut g = self.clone();
        for (x, y, a, b) in self.edges() {
            if !(a == Mark::Circle && b == Mark::Circle) {
                g.remove_edge(x, y);
            }
        }
        g
    }

    /// Subgraph induced by `nodes`, renumbered in canonical order.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Pmg {
        let mut keep: Vec<usize> = nodes.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let names: Vec<&str> = keep.iter().map(|&i| self.name(i)).collect();
        let mut g = Pmg::new(&names).expect("names already unique");
        for (i, &x) in keep.iter().enumerate() {
            for (j, &y) in keep.iter().enumerate().skip(i + 1) {
                if let Some((a, b)) = self.edge(x, y) {
                    g.add_edge(i, j, a, b).expect("fresh graph");
                }
            }
        }
        g
    }

    /// Same nodes, no edges.
    pub fn empty_like(&self) -> Pmg {
        let mut g = self.clone();
        g.marks.iter_mut().for_each(|m| *m = None);
        g.adj = Arc::new(vec![Vec::new(); self.n()]);
        g
    }

    /// All invariant marks as `(x, y, mark at y)` over edges in `edges`
    /// (each edge contributes up to two entries).
    pub fn invariant_marks(&self) -> Vec<(usize, usize, Mark)> {
        let mut out = Vec::new();
        for (x, y, a, b) in self.edges() {
            if a.is_invariant() {
                out.push((y, x, a));
            }
            if b.is_invariant() {
                out.push((x, y, b));
            }
        }
        out.sort_unstable();
        out
    }

    /// Whether every invariant mark of `self` is present in `other`.
    pub fn invariants_kept_in(&self, other: &Pmg) -> bool {
        self.same_skeleton(other)
            && self
                .invariant_marks()
                .iter()
                .all(|&(x, y, m)| other.mark(x, y) == Some(m))
    }

    /// `a *-> b <-* c` with `a`, `c` non-adjacent, as `(a, b, c)` with `a < c`.
    pub fn unshielded_colliders(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for b in 0..self.n() {
            let nb = &self.adj[b];
            for (i, &a) in nb.iter().enumerate() {
                if !self.arrow_at(a, b) {
                    continue;
                }
                for &c in &nb[i + 1..] {
                    if self.arrow_at(c, b) && !self.adjacent(a, c) {
                        out.push((a, b, c));
                    }
                }
            }
        }
        out
    }
}

pub fn mask_to_vec(mask: &[bool]) -> Vec<usize> {
    mask.iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pmg::parse_pmg;

    fn fig1b() -> Pmg {
        parse_pmg("nodes: A B C D\nB --> A\nA --> C\nB --> C\nC --> D\nA --> D\n").unwrap()
    }

    #[test]
    fn mark_is_addressed_per_endpoint() {
        let g = parse_pmg("nodes: B C\nB o-> C").unwrap();
        assert_eq!(g.mark(0, 1), Some(Mark::Arrow));
        assert_eq!(g.mark(1, 0), Some(Mark::Circle));
        let g = g.oriented(1, 0, Mark::Tail).unwrap();
        assert_eq!(g.edge(0, 1), Some((Mark::Tail, Mark::Arrow)));
    }

    #[test]
    fn conflicting_orientation_is_rejected() {
        let g = parse_pmg("nodes: A D\nA --> D").unwrap();
        let err = g.oriented(1, 0, Mark::Arrow).unwrap_err();
        assert!(matches!(err, GraphError::Conflict { .. }));
        assert_eq!(g.oriented(0, 1, Mark::Arrow).unwrap(), g);
    }

    #[test]
    fn ancestors_and_parents() {
        let m = fig1b();
        assert_eq!(m.ancestors(3), vec![0, 1, 2, 3]);
        assert_eq!(m.parents(2), vec![0, 1]);
        let lone = Pmg::new(&["X"]).unwrap();
        assert_eq!(lone.ancestors(0), vec![0]);
    }

    #[test]
    fn possible_ancestors_follow_circles() {
        let g = parse_pmg("nodes: A B C D\nA o-o B\nA o-o C\nA --> D\nB o-> C\nC --> D").unwrap();
        assert_eq!(g.possible_ancestors(0), vec![0, 1, 2]);
        let c = parse_pmg("nodes: A B C D\nA o-o B\nA o-o C\nB o-o C\nC o-o D\nA o-o D").unwrap();
        assert_eq!(c.possible_ancestors(3), vec![0, 1, 2, 3]);
    }

    #[test]
    fn ancestral_checks() {
        let cyc = parse_pmg("nodes: A B C\nA --> B\nB --> C\nA <-> C").unwrap();
        assert!(!cyc.is_ancestral());
        assert_eq!(cyc.find_len3_cycle(), Some([0, 1, 2]));
        assert!(fig1b().is_ancestral());
    }

    #[test]
    fn circle_component_drops_oriented_edges() {
        let g = parse_pmg("nodes: A B C D\nA o-o B\nA o-o C\nA --> D\nB o-> C\nC --> D").unwrap();
        let cc = g.circle_component();
        assert_eq!(cc.edge_count(), 2);
        assert!(cc.adjacent(0, 1) && cc.adjacent(0, 2));
        assert_eq!(g.induced_subgraph(&[]).n(), 0);
    }
}
