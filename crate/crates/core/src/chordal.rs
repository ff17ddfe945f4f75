// SPDX-License-Identifier: Apache-2.0
//! Chordal skeletons, join trees and the MAG sampler.
//!
//! A join tree has the maximal cliques of a chordal skeleton as nodes. Its
//! edges carry a direction whenever the `gamma` relation holds between the
//! two cliques. The tree is rewired until it is anchored at a chosen clique,
//! then fully directed, and the induced orientations are pushed back into
//! the graph. The clique holding the requested edge is oriented last.
//!
//! `sample_mag` runs this per component of circle-carrying edges, merges the
//! result with the invariant marks of the input and validates it. When the
//! construction does not validate, a bounded search over the represented
//! class takes over.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{Mark, Pmg};
use crate::oracle::{self, OracleError};
use crate::paths::minimal_collider_paths;
use crate::pmg::marks_token;

/// Upper bound on rewiring rounds in `transform_tree`.
const MAX_ROUNDS: usize = 10_000;

/// Cap on circle-carrying edges for the fallback search.
pub const SEARCH_CAP: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChordalError {
    #[error("skeleton is not chordal")]
    NotChordal,
    #[error("skeleton is not connected")]
    Disconnected,
    #[error("join tree violates running intersection")]
    RunningIntersection,
    #[error("no edge between {0} and {1}")]
    NoEdge(String, String),
    #[error("cannot orient {edge} as {request}: the graph has {existing}")]
    InadmissibleRequest {
        edge: String,
        request: String,
        existing: String,
    },
    #[error("tree postcondition failed: {0}")]
    TreeInvariant(String),
    #[error("orientation conflict: {0}")]
    Conflict(String),
    #[error("no MAG represented by the graph has {0}")]
    NoSuchMag(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

// ---------------------------------------------------------------------------
// chordality and cliques

/// Maximum cardinality search order over the skeleton. Ties go to the
/// smallest index.
pub fn mcs_order(g: &Pmg) -> Vec<usize> {
    let n = g.n();
    let mut weight = vec![0usize; n];
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !done[v])
            .max_by_key(|&v| (weight[v], std::cmp::Reverse(v)))
            .expect("unnumbered node left");
        done[v] = true;
        order.push(v);
        for &w in g.neighbors(v) {
            if !done[w] {
                weight[w] += 1;
            }
        }
    }
    order
}

/// For every node, its neighbours numbered before it in `order`.
fn earlier_neighbours(g: &Pmg, order: &[usize]) -> Vec<Vec<usize>> {
    let mut pos = vec![0; g.n()];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    order
        .iter()
        .map(|&v| {
            let mut nb: Vec<usize> = g
                .neighbors(v)
                .iter()
                .copied()
                .filter(|&w| pos[w] < pos[v])
                .collect();
            nb.sort_unstable();
            nb
        })
        .collect()
}

fn is_clique(g: &Pmg, nodes: &[usize]) -> bool {
    nodes
        .iter()
        .enumerate()
        .all(|(i, &a)| nodes[i + 1..].iter().all(|&b| g.adjacent(a, b)))
}

/// Whether the skeleton is chordal. The reverse of an MCS order is a
/// perfect elimination order exactly for chordal graphs.
pub fn is_chordal(g: &Pmg) -> bool {
    let order = mcs_order(g);
    earlier_neighbours(g, &order)
        .iter()
        .all(|nb| is_clique(g, nb))
}

/// Maximal cliques of a chordal skeleton, each sorted, in lexicographic
/// order. Isolated nodes form singleton cliques.
pub fn maximal_cliques(g: &Pmg) -> Result<Vec<Vec<usize>>, ChordalError> {
    let order = mcs_order(g);
    let earlier = earlier_neighbours(g, &order);
    let mut candidates: Vec<Vec<usize>> = Vec::new();
    for (v, nb) in order.iter().zip(&earlier) {
        if !is_clique(g, nb) {
            return Err(ChordalError::NotChordal);
        }
        let mut c = nb.clone();
        c.push(*v);
        c.sort_unstable();
        candidates.push(c);
    }
    let subset = |a: &[usize], b: &[usize]| a.iter().all(|x| b.binary_search(x).is_ok());
    let mut out: Vec<Vec<usize>> = candidates
        .iter()
        .filter(|c| {
            !candidates
                .iter()
                .any(|d| d.len() > c.len() && subset(c, d))
        })
        .cloned()
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|x| b.contains(x)).collect()
}

fn minus(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|x| !b.contains(x)).collect()
}

// ---------------------------------------------------------------------------
// gamma

/// Witness `(a, b)` for `gamma(ci, cj)`: the separator is non-empty, every
/// edge from the separator into `cj` minus the separator is `-->` out of
/// the separator, and some `a` in `ci` minus the separator has `a *-> b`
/// with `b` in the separator.
pub fn gamma(g: &Pmg, ci: &[usize], cj: &[usize]) -> Option<(usize, usize)> {
    let sep = intersect(ci, cj);
    if sep.is_empty() {
        return None;
    }
    let rest_j = minus(cj, &sep);
    if !sep
        .iter()
        .all(|&b| rest_j.iter().all(|&c| g.is_directed(b, c)))
    {
        return None;
    }
    let rest_i = minus(ci, &sep);
    rest_i
        .iter()
        .flat_map(|&a| sep.iter().map(move |&b| (a, b)))
        .find(|&(a, b)| g.arrow_at(a, b))
}

// ---------------------------------------------------------------------------
// join trees

/// State of a tree edge relative to the pair `(lo, hi)` of clique indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TreeEdge {
    Undirected,
    /// `lo -> hi`
    Forward,
    /// `lo <- hi`
    Backward,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinTree {
    pub cliques: Vec<Vec<usize>>,
    edges: BTreeMap<(usize, usize), TreeEdge>,
}

fn key(i: usize, j: usize) -> (usize, usize) {
    (i.min(j), i.max(j))
}

impl JoinTree {
    pub fn new(cliques: Vec<Vec<usize>>) -> Self {
        JoinTree {
            cliques,
            edges: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains_key(&key(i, j))
    }

    /// `i -> j`
    pub fn points(&self, i: usize, j: usize) -> bool {
        match self.edges.get(&key(i, j)) {
            Some(TreeEdge::Forward) => i < j,
            Some(TreeEdge::Backward) => i > j,
            _ => false,
        }
    }

    pub fn is_undirected(&self, i: usize, j: usize) -> bool {
        self.edges.get(&key(i, j)) == Some(&TreeEdge::Undirected)
    }

    /// Sets `i -> j`.
    pub fn direct(&mut self, i: usize, j: usize) {
        let s = if i < j {
            TreeEdge::Forward
        } else {
            TreeEdge::Backward
        };
        self.edges.insert(key(i, j), s);
    }

    pub fn undirect(&mut self, i: usize, j: usize) {
        self.edges.insert(key(i, j), TreeEdge::Undirected);
    }

    pub fn remove(&mut self, i: usize, j: usize) {
        self.edges.remove(&key(i, j));
    }

    /// Edges as `(lo, hi, state)`.
    pub fn tree_edges(&self) -> Vec<(usize, usize, TreeEdge)> {
        self.edges.iter().map(|(&(a, b), &s)| (a, b, s)).collect()
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        self.edges
            .keys()
            .filter_map(|&(a, b)| {
                if a == i {
                    Some(b)
                } else if b == i {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn parents(&self, i: usize) -> Vec<usize> {
        self.neighbors(i)
            .into_iter()
            .filter(|&j| self.points(j, i))
            .collect()
    }

    pub fn undirected_count(&self) -> usize {
        self.edges
            .values()
            .filter(|&&s| s == TreeEdge::Undirected)
            .count()
    }

    /// Ancestors of `c` (including `c`).
    pub fn ancestors(&self, c: usize) -> Vec<bool> {
        self.backward_closure(c, |t, a, b| t.points(a, b))
    }

    /// Possible ancestors of `c`: reachable backwards over `->` and `-`.
    pub fn possible_ancestors(&self, c: usize) -> Vec<bool> {
        self.backward_closure(c, |t, a, b| t.points(a, b) || t.is_undirected(a, b))
    }

    fn backward_closure(&self, c: usize, step: impl Fn(&Self, usize, usize) -> bool) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        seen[c] = true;
        let mut stack = vec![c];
        while let Some(v) = stack.pop() {
            for u in self.neighbors(v) {
                if !seen[u] && step(self, u, v) {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen
    }

    /// The unique tree path from `i` to `j`.
    pub fn path(&self, i: usize, j: usize) -> Option<Vec<usize>> {
        let mut prev = vec![usize::MAX; self.len()];
        prev[i] = i;
        let mut queue = VecDeque::from([i]);
        while let Some(v) = queue.pop_front() {
            if v == j {
                let mut p = vec![j];
                let mut cur = j;
                while cur != i {
                    cur = prev[cur];
                    p.push(cur);
                }
                p.reverse();
                return Some(p);
            }
            for u in self.neighbors(v) {
                if prev[u] == usize::MAX {
                    prev[u] = v;
                    queue.push_back(u);
                }
            }
        }
        None
    }

    pub fn distance(&self, i: usize, j: usize) -> usize {
        self.path(i, j).map_or(usize::MAX, |p| p.len() - 1)
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.len() && (0..self.len()).all(|j| self.path(0, j).is_some())
    }

    /// Every clique on the path between two cliques contains their
    /// intersection.
    pub fn running_intersection(&self) -> bool {
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let sep = intersect(&self.cliques[i], &self.cliques[j]);
                let Some(p) = self.path(i, j) else {
                    return false;
                };
                if !p
                    .iter()
                    .all(|&k| sep.iter().all(|x| self.cliques[k].contains(x)))
                {
                    return false;
                }
            }
        }
        true
    }

    /// A node with two parents.
    pub fn collider(&self) -> Option<usize> {
        (0..self.len()).find(|&i| self.parents(i).len() > 1)
    }

    /// No path `c1 -> c2 - ... - ck -> ... -> c0` with an undirected
    /// stretch. Each undirected stretch holds at most one ancestor of `c0`,
    /// so it is enough that no other clique of that stretch has a parent.
    pub fn is_anchored(&self, c0: usize) -> bool {
        let an = self.ancestors(c0);
        (0..self.len()).filter(|&s| an[s]).all(|s| {
            let mut seen = vec![false; self.len()];
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for u in self.neighbors(v) {
                    if !seen[u] && self.is_undirected(u, v) {
                        if !self.parents(u).is_empty() {
                            return false;
                        }
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
            true
        })
    }

    /// Edge directions agree with `gamma` on `g`.
    pub fn gamma_consistent(&self, g: &Pmg) -> bool {
        self.edges.keys().all(|&(a, b)| {
            let want = classify(g, &self.cliques, a, b);
            self.edges[&(a, b)] == want
        })
    }

    fn triples(&self) -> BTreeSet<(usize, usize, usize)> {
        let mut out = BTreeSet::new();
        for j in 0..self.len() {
            let nb = self.neighbors(j);
            for &i in &nb {
                for &k in &nb {
                    if i != k {
                        out.insert((i, j, k));
                    }
                }
            }
        }
        out
    }

    pub fn render(&self, g: &Pmg) -> String {
        let label = |i: usize| {
            let names: Vec<&str> = self.cliques[i].iter().map(|&v| g.name(v)).collect();
            format!("{{{}}}", names.join(","))
        };
        let mut out = String::new();
        for (a, b, s) in self.tree_edges() {
            let arrow = match s {
                TreeEdge::Undirected => "---",
                TreeEdge::Forward => "-->",
                TreeEdge::Backward => "<--",
            };
            out.push_str(&format!("{} {} {}\n", label(a), arrow, label(b)));
        }
        out
    }
}

impl fmt::Display for TreeEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TreeEdge::Undirected => "-",
            TreeEdge::Forward => "->",
            TreeEdge::Backward => "<-",
        })
    }
}

/// Tree edge state between cliques `a < b` dictated by `gamma`.
fn classify(g: &Pmg, cliques: &[Vec<usize>], a: usize, b: usize) -> TreeEdge {
    let (lo, hi) = key(a, b);
    if gamma(g, &cliques[lo], &cliques[hi]).is_some() {
        TreeEdge::Forward
    } else if gamma(g, &cliques[hi], &cliques[lo]).is_some() {
        TreeEdge::Backward
    } else {
        TreeEdge::Undirected
    }
}

fn connect_by_gamma(t: &mut JoinTree, g: &Pmg, i: usize, j: usize) {
    let s = classify(g, &t.cliques, i, j);
    t.edges.insert(key(i, j), s);
}

/// Join tree of a connected chordal skeleton: a maximum weight spanning tree
/// of the clique graph, weights being separator sizes. Edges are directed
/// by `gamma`.
pub fn build_join_tree(g: &Pmg) -> Result<JoinTree, ChordalError> {
    let cliques = maximal_cliques(g)?;
    let k = cliques.len();
    let mut pairs = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let w = intersect(&cliques[i], &cliques[j]).len();
            if w > 0 {
                pairs.push((std::cmp::Reverse(w), i, j));
            }
        }
    }
    pairs.sort();
    let mut root: Vec<usize> = (0..k).collect();
    fn find(root: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while root[r] != r {
            r = root[r];
        }
        let mut c = x;
        while root[c] != r {
            let next = root[c];
            root[c] = r;
            c = next;
        }
        r
    }
    let mut t = JoinTree::new(cliques);
    for (_, i, j) in pairs {
        let (ri, rj) = (find(&mut root, i), find(&mut root, j));
        if ri != rj {
            root[ri] = rj;
            connect_by_gamma(&mut t, g, i, j);
        }
    }
    if !t.is_tree() {
        return Err(ChordalError::Disconnected);
    }
    if !t.running_intersection() {
        return Err(ChordalError::RunningIntersection);
    }
    Ok(t)
}

// ---------------------------------------------------------------------------
// tree transformations

/// Rewires `i - j - k` into `i - k` whenever `gamma(i, j)`, not
/// `gamma(j, k)` and the separator of `i, k` equals that of `j, k` and lies
/// in the separator of `i, j`.
pub fn transform_tree_helper(g: &Pmg, t: &JoinTree) -> JoinTree {
    let mut t = t.clone();
    let mut queue: VecDeque<(usize, usize, usize)> = t.triples().into_iter().collect();
    while let Some((i, j, k)) = queue.pop_front() {
        if !(t.has_edge(i, j) && t.has_edge(j, k)) {
            continue;
        }
        let (ci, cj, ck) = (&t.cliques[i], &t.cliques[j], &t.cliques[k]);
        if gamma(g, ci, cj).is_none() || gamma(g, cj, ck).is_some() {
            continue;
        }
        let lij = intersect(ci, cj);
        let ljk = intersect(cj, ck);
        let lik = intersect(ci, ck);
        if lik != ljk || !lik.iter().all(|x| lij.contains(x)) {
            continue;
        }
        let before = t.triples();
        t.remove(j, k);
        connect_by_gamma(&mut t, g, i, k);
        let after = t.triples();
        queue.retain(|tr| !(before.contains(tr) && !after.contains(tr)));
        queue.extend(after.difference(&before).copied());
    }
    t
}

/// Paths `c1 -> c2 - ... - ck -> ... -> c0` (at least one undirected edge)
/// and `c1 -> c2 - ... - cm <- cm+1` (at least one undirected edge).
pub fn relevant_paths(t: &JoinTree, c0: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for c1 in 0..t.len() {
        for c2 in t.neighbors(c1) {
            if !t.points(c1, c2) {
                continue;
            }
            let mut stack = vec![vec![c1, c2]];
            while let Some(p) = stack.pop() {
                let last = *p.last().expect("non-empty");
                let prev = p[p.len() - 2];
                for u in t.neighbors(last) {
                    if u == prev || !t.is_undirected(last, u) {
                        continue;
                    }
                    let mut q = p.clone();
                    q.push(u);
                    // A: continue along a directed path into c0
                    if u == c0 {
                        out.push(q.clone());
                    } else if let Some(rest) = t.path(u, c0) {
                        if rest.windows(2).all(|w| t.points(w[0], w[1]))
                            && !rest[1..].iter().any(|x| q.contains(x))
                        {
                            let mut full = q.clone();
                            full.extend_from_slice(&rest[1..]);
                            out.push(full);
                        }
                    }
                    // B: closed by an edge pointing back
                    for w in t.neighbors(u) {
                        if w != last && t.points(w, u) {
                            let mut b = q.clone();
                            b.push(w);
                            out.push(b);
                        }
                    }
                    stack.push(q);
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Anchors the tree at `c0`. Among relevant paths the one whose first
/// clique is farthest from `c0` is rewired first; ties go to the
/// lexicographically smallest path.
pub fn transform_tree(g: &Pmg, t: &JoinTree, c0: usize) -> Result<JoinTree, ChordalError> {
    let mut t = transform_tree_helper(g, t);
    let mut paths = relevant_paths(&t, c0);
    let mut rounds = 0;
    while !paths.is_empty() {
        rounds += 1;
        if rounds > MAX_ROUNDS {
            return Err(ChordalError::TreeInvariant(
                "rewiring did not terminate".into(),
            ));
        }
        let p = paths
            .iter()
            .max_by(|a, b| {
                t.distance(a[0], c0)
                    .cmp(&t.distance(b[0], c0))
                    .then_with(|| b.cmp(a))
            })
            .expect("non-empty")
            .clone();
        t.remove(p[0], p[1]);
        connect_by_gamma(&mut t, g, p[0], p[2]);
        t = transform_tree_helper(g, &t);
        paths = relevant_paths(&t, c0);
    }
    check_tree(g, &t, c0)?;
    Ok(t)
}

fn check_tree(g: &Pmg, t: &JoinTree, c0: usize) -> Result<(), ChordalError> {
    let fail = |s: &str| Err(ChordalError::TreeInvariant(s.to_string()));
    if !t.is_tree() || !t.running_intersection() {
        return fail("not a join tree");
    }
    if !t.gamma_consistent(g) {
        return fail("edge directions disagree with gamma");
    }
    if t.collider().is_some() {
        return fail("tree has a collider");
    }
    if !t.is_anchored(c0) {
        return fail("tree is not anchored");
    }
    Ok(())
}

/// All simple paths over undirected tree edges with at least two cliques,
/// in both directions.
fn undirected_paths(t: &JoinTree) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for s in 0..t.len() {
        let mut stack = vec![vec![s]];
        while let Some(p) = stack.pop() {
            let last = *p.last().expect("non-empty");
            for u in t.neighbors(last) {
                if t.is_undirected(last, u) && !p.contains(&u) {
                    let mut q = p.clone();
                    q.push(u);
                    out.push(q.clone());
                    stack.push(q);
                }
            }
        }
    }
    out
}

/// Directs every edge of the anchored tree without creating colliders or
/// new ancestors of `c0`. Longest undirected paths go first; a path starting
/// at an ancestor of `c0` or at a clique with a parent is preferred, then
/// the lexicographically smallest.
pub fn orient_tree(g: &Pmg, t: &JoinTree, c0: usize) -> Result<JoinTree, ChordalError> {
    let mut t = transform_tree(g, t, c0)?;
    let anchored = t.ancestors(c0);
    while t.undirected_count() > 0 {
        let an = t.ancestors(c0);
        let eligible = |p: &Vec<usize>| an[p[0]] || !t.parents(p[0]).is_empty();
        let paths = undirected_paths(&t);
        let pool: Vec<&Vec<usize>> = if paths.iter().any(eligible) {
            paths.iter().filter(|p| eligible(p)).collect()
        } else {
            paths.iter().collect()
        };
        let p = pool
            .into_iter()
            .max_by(|a, b| a.len().cmp(&b.len()).then_with(|| b.cmp(a)))
            .expect("an undirected edge exists")
            .clone();
        let forward = eligible(&p);
        for w in p.windows(2) {
            if forward {
                t.direct(w[0], w[1]);
            } else {
                t.direct(w[1], w[0]);
            }
        }
    }
    if t.collider().is_some() {
        return Err(ChordalError::TreeInvariant(
            "directed tree has a collider".into(),
        ));
    }
    if t.ancestors(c0) != anchored {
        return Err(ChordalError::TreeInvariant(
            "orientation changed the ancestors of the anchor".into(),
        ));
    }
    Ok(t)
}

fn conflict(g: &Pmg, x: usize, y: usize, want: &str) -> ChordalError {
    let (mx, my) = g.edge(x, y).expect("edge exists");
    ChordalError::Conflict(format!(
        "{} {} {} cannot become {}",
        g.name(x),
        marks_token(mx, my),
        g.name(y),
        want
    ))
}

fn orient_directed(g: &mut Pmg, x: usize, y: usize) -> Result<(), ChordalError> {
    if g.set_mark(y, x, Mark::Tail).is_err() || g.set_mark(x, y, Mark::Arrow).is_err() {
        return Err(conflict(g, x, y, "-->"));
    }
    Ok(())
}

fn orient_arrow(g: &mut Pmg, x: usize, y: usize) -> Result<(), ChordalError> {
    if g.set_mark(x, y, Mark::Arrow).is_err() {
        return Err(conflict(g, x, y, "an arrowhead at the second node"));
    }
    Ok(())
}

/// Orientations induced by a fully directed tree: whenever `ci` is an
/// ancestor of `cj`, every node of their separator points into every node of
/// `cj` outside `ci`.
pub fn apply_tree_orientations(g: &Pmg, t: &JoinTree) -> Result<Pmg, ChordalError> {
    let mut out = g.clone();
    for j in 0..t.len() {
        let an = t.ancestors(j);
        for i in (0..t.len()).filter(|&i| i != j && an[i]) {
            let (ci, cj) = (&t.cliques[i], &t.cliques[j]);
            for &b in &intersect(ci, cj) {
                for &c in &minus(cj, ci) {
                    orient_directed(&mut out, b, c)?;
                }
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// cliques

/// Requested orientation of an edge `a - b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum EdgeRequest {
    /// `a --> b`
    Directed,
    /// `a <-- b`
    Reverse,
    /// `a <-> b`
    Bidirected,
}

impl EdgeRequest {
    pub const ALL: [EdgeRequest; 3] = [
        EdgeRequest::Directed,
        EdgeRequest::Reverse,
        EdgeRequest::Bidirected,
    ];

    /// Marks `(at a, at b)`.
    pub fn marks(self) -> (Mark, Mark) {
        match self {
            EdgeRequest::Directed => (Mark::Tail, Mark::Arrow),
            EdgeRequest::Reverse => (Mark::Arrow, Mark::Tail),
            EdgeRequest::Bidirected => (Mark::Arrow, Mark::Arrow),
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            EdgeRequest::Directed => "dir",
            EdgeRequest::Reverse => "rev",
            EdgeRequest::Bidirected => "bidir",
        }
    }
}

impl fmt::Display for EdgeRequest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.marks();
        f.write_str(marks_token(a, b))
    }
}

impl FromStr for EdgeRequest {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "dir" | "-->" => Ok(EdgeRequest::Directed),
            "rev" | "<--" => Ok(EdgeRequest::Reverse),
            "bidir" | "<->" => Ok(EdgeRequest::Bidirected),
            _ => Err(format!("unknown orientation `{s}`, expected dir, rev or bidir")),
        }
    }
}

/// The request fits the current marks: each requested mark is already there
/// or replaces a circle.
pub fn check_request(g: &Pmg, a: usize, b: usize, req: EdgeRequest) -> Result<(), ChordalError> {
    let Some((ma, mb)) = g.edge(a, b).map(|_| (g.mark(b, a).unwrap(), g.mark(a, b).unwrap()))
    else {
        return Err(ChordalError::NoEdge(g.name(a).into(), g.name(b).into()));
    };
    let (wa, wb) = req.marks();
    let fits = |cur: Mark, want: Mark| cur == want || cur == Mark::Circle;
    if fits(ma, wa) && fits(mb, wb) {
        Ok(())
    } else {
        Err(ChordalError::InadmissibleRequest {
            edge: format!("{}-{}", g.name(a), g.name(b)),
            request: req.to_string(),
            existing: format!("{} {} {}", g.name(a), marks_token(ma, mb), g.name(b)),
        })
    }
}

fn pairs(nodes: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    nodes
        .iter()
        .enumerate()
        .flat_map(move |(i, &x)| nodes[i + 1..].iter().map(move |&y| (x, y)))
}

/// Turns every circle on an edge inside `nodes` into an arrowhead.
fn circles_to_arrows(g: &mut Pmg, nodes: &[usize]) {
    for (x, y) in pairs(nodes) {
        if g.circle_at(x, y) {
            g.force_mark(x, y, Mark::Arrow);
        }
        if g.circle_at(y, x) {
            g.force_mark(y, x, Mark::Arrow);
        }
    }
}

/// Total order of the clique with `first` before `second`, found by
/// repeatedly removing a node without outgoing `-->` edges.
fn sink_elimination(g: &Pmg, clique: &[usize], first: usize, second: usize) -> Option<Vec<usize>> {
    let mut left: Vec<usize> = clique.to_vec();
    let mut removed = Vec::new();
    while !left.is_empty() {
        let sink = |v: usize, left: &[usize]| {
            left.iter().all(|&w| w == v || !(g.arrow_at(v, w) && !g.arrow_at(w, v)))
        };
        let pick = if left.contains(&second) && sink(second, &left) {
            Some(second)
        } else {
            left.iter()
                .copied()
                .find(|&v| sink(v, &left) && !(v == first && left.contains(&second)))
        }?;
        left.retain(|&v| v != pick);
        removed.push(pick);
    }
    removed.reverse();
    Some(removed)
}

/// Orients the circles of one clique so that `a - b` gets `req`.
///
/// For `-->` and `<--` on a clique without `<->` edges this is a DAG
/// orientation from sink elimination, with `o->` read as `-->`. Otherwise `<->` turns every circle
/// into an arrowhead, and a directed request orients `a --> b`, copies
/// `a --> c` for every `b --> c`, puts an arrowhead at `d` on `a - d` and
/// `b <-> d` for every `b o-> d` or `b <-> d`, and turns the remaining
/// circles into arrowheads.
pub fn orient_clique_to_mag(
    g: &Pmg,
    clique: &[usize],
    a: usize,
    b: usize,
    req: EdgeRequest,
) -> Result<Pmg, ChordalError> {
    check_request(g, a, b, req)?;
    let mut out = g.clone();
    let (a, b) = match req {
        EdgeRequest::Reverse => (b, a),
        _ => (a, b),
    };
    if req == EdgeRequest::Bidirected {
        orient_arrow(&mut out, a, b)?;
        orient_arrow(&mut out, b, a)?;
        circles_to_arrows(&mut out, clique);
        return Ok(out);
    }
    let undirected_only = pairs(clique).all(|(x, y)| {
        let (mx, my) = g.edge(x, y).expect("clique");
        matches!(
            (mx, my),
            (Mark::Circle, Mark::Circle)
                | (Mark::Tail | Mark::Circle, Mark::Arrow)
                | (Mark::Arrow, Mark::Tail | Mark::Circle)
        )
    });
    if undirected_only {
        if let Some(order) = sink_elimination(g, clique, a, b) {
            let pos = |v: usize| order.iter().position(|&w| w == v).expect("in clique");
            for (x, y) in pairs(clique) {
                if g.circle_at(x, y) || g.circle_at(y, x) {
                    let (s, t) = if pos(x) < pos(y) { (x, y) } else { (y, x) };
                    orient_directed(&mut out, s, t)?;
                }
            }
            return Ok(out);
        }
    }
    orient_directed(&mut out, a, b)?;
    for &c in clique {
        if c != a && c != b && g.is_directed(b, c) {
            orient_directed(&mut out, a, c)?;
        }
    }
    for &d in clique {
        if d != a && d != b && g.arrow_at(b, d) && !g.tail_at(d, b) {
            orient_arrow(&mut out, a, d)?;
            orient_arrow(&mut out, d, b)?;
        }
    }
    circles_to_arrows(&mut out, clique);
    Ok(out)
}

// ---------------------------------------------------------------------------
// sampling

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMethod {
    /// Join tree construction, validated.
    Construction,
    /// Bounded search after the construction failed validation.
    Search,
}

#[derive(Clone, Debug)]
pub struct Sample {
    pub mag: Pmg,
    pub method: SampleMethod,
    /// Why the construction was not used, if it was not.
    pub note: Option<String>,
}

/// Connected components of the `o-o` edges of `reference`, each sorted,
/// singletons dropped.
pub fn circle_components(reference: &Pmg) -> Vec<Vec<usize>> {
    let n = reference.n();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut members = vec![s];
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &w in reference.neighbors(v) {
                if !seen[w] && reference.edge(v, w) == Some((Mark::Circle, Mark::Circle)) {
                    seen[w] = true;
                    members.push(w);
                    stack.push(w);
                }
            }
        }
        if members.len() > 1 {
            members.sort_unstable();
            out.push(members);
        }
    }
    out
}

/// Orients one component, given as an induced subgraph.
fn orient_component(
    h: &Pmg,
    request: Option<(usize, usize, EdgeRequest)>,
) -> Result<Pmg, ChordalError> {
    let tree = build_join_tree(h)?;
    let c0 = match request {
        Some((a, b, _)) => tree
            .cliques
            .iter()
            .position(|c| c.contains(&a) && c.contains(&b))
            .expect("every edge lies in a maximal clique"),
        None => 0,
    };
    let directed = orient_tree(h, &tree, c0)?;
    let mut gp = apply_tree_orientations(h, &directed)?;
    if let Some((a, b, req)) = request {
        gp = orient_clique_to_mag(&gp, &tree.cliques[c0], a, b, req)?;
    }
    let all: Vec<usize> = (0..h.n()).collect();
    circles_to_arrows(&mut gp, &all);
    Ok(gp)
}

/// Builds a candidate MAG for `g` with `a - b` oriented as `req`.
///
/// The circle components are taken from `reference`, normally the
/// essential graph `g` was derived from. Circles outside every component
/// become tails, the request excepted. Each component is then oriented
/// through its join tree and merged back.
pub fn construct_mag(
    g: &Pmg,
    reference: &Pmg,
    a: usize,
    b: usize,
    req: EdgeRequest,
) -> Result<Pmg, ChordalError> {
    check_request(g, a, b, req)?;
    if !g.same_skeleton(reference) {
        return Err(ChordalError::Conflict(
            "reference graph has a different skeleton".into(),
        ));
    }
    let comps = circle_components(reference);
    let mut comp_of = vec![usize::MAX; g.n()];
    for (i, c) in comps.iter().enumerate() {
        for &v in c {
            comp_of[v] = i;
        }
    }
    let inside = |x: usize, y: usize| comp_of[x] != usize::MAX && comp_of[x] == comp_of[y];
    let mut out = g.clone();
    let (wa, wb) = req.marks();
    if !inside(a, b) {
        out.force_mark(b, a, wa);
        out.force_mark(a, b, wb);
    }
    for (x, y, mx, my) in g.edges() {
        if inside(x, y) || (x, y) == (a.min(b), a.max(b)) {
            continue;
        }
        if mx == Mark::Circle {
            out.force_mark(y, x, Mark::Tail);
        }
        if my == Mark::Circle {
            out.force_mark(x, y, Mark::Tail);
        }
    }
    for (i, nodes) in comps.iter().enumerate() {
        let h = out.induced_subgraph(nodes);
        let local = |v: usize| nodes.binary_search(&v).expect("member");
        let request = (comp_of[a] == i && inside(a, b)).then(|| (local(a), local(b), req));
        let oriented = orient_component(&h, request)?;
        for (x, y, mx, my) in oriented.edges() {
            out.force_mark(nodes[y], nodes[x], mx);
            out.force_mark(nodes[x], nodes[y], my);
        }
    }
    if out.mark(b, a) != Some(wa) || out.mark(a, b) != Some(wb) {
        return Err(ChordalError::Conflict("requested marks were not kept".into()));
    }
    Ok(out)
}

/// Whether `m` is a MAG represented by `g`: no circles, ancestral, maximal,
/// the invariant marks of `g` and the same minimal collider paths.
pub fn is_represented_by(m: &Pmg, g: &Pmg) -> bool {
    oracle::is_mag(m)
        && g.invariants_kept_in(m)
        && minimal_collider_paths(m) == minimal_collider_paths(g)
}

/// A MAG represented by `g` in which `a - b` is oriented as `req`, with `g`
/// itself as the source of circle components.
pub fn sample_mag(g: &Pmg, a: usize, b: usize, req: EdgeRequest) -> Result<Sample, ChordalError> {
    sample_mag_with(g, g, a, b, req)
}

/// `sample_mag` with circle components read from `reference`, then from
/// `g` itself if that candidate does not validate.
pub fn sample_mag_with(
    g: &Pmg,
    reference: &Pmg,
    a: usize,
    b: usize,
    req: EdgeRequest,
) -> Result<Sample, ChordalError> {
    check_request(g, a, b, req)?;
    let (wa, wb) = req.marks();
    let mut note = String::new();
    let sources: &[&Pmg] = if std::ptr::eq(g, reference) { &[g] } else { &[reference, g] };
    for r in sources {
        note = match construct_mag(g, r, a, b, req) {
            Ok(m) if is_represented_by(&m, g) => {
                return Ok(Sample {
                    mag: m,
                    method: SampleMethod::Construction,
                    note: None,
                })
            }
            Ok(_) => "construction did not validate".to_string(),
            Err(e) => e.to_string(),
        };
    }
    let found = oracle::represented_with(g, a, b, wa, wb, SEARCH_CAP)?;
    match found {
        Some(m) => Ok(Sample {
            mag: m,
            method: SampleMethod::Search,
            note: Some(note),
        }),
        None => Err(ChordalError::NoSuchMag(format!(
            "{} {} {}",
            g.name(a),
            req,
            g.name(b)
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pmg::parse_pmg;

    fn names(g: &Pmg, c: &[usize]) -> String {
        c.iter().map(|&v| g.name(v)).collect()
    }

    #[test]
    fn triangle_is_one_clique() {
        let g = parse_pmg("nodes: A B C\nA o-o B\nB o-o C\nA o-o C").unwrap();
        assert!(is_chordal(&g));
        let t = build_join_tree(&g).unwrap();
        assert_eq!(t.cliques, vec![vec![0, 1, 2]]);
        assert!(t.tree_edges().is_empty());
    }

    #[test]
    fn four_cycle_is_not_chordal() {
        let g = parse_pmg("nodes: A B C D\nA o-o B\nB o-o C\nC o-o D\nD o-o A").unwrap();
        assert!(!is_chordal(&g));
        assert_eq!(build_join_tree(&g), Err(ChordalError::NotChordal));
    }

    #[test]
    fn path_cliques_and_tree() {
        let g = parse_pmg("nodes: A B C D\nA o-o B\nB o-o C\nC o-o D").unwrap();
        let t = build_join_tree(&g).unwrap();
        let got: Vec<String> = t.cliques.iter().map(|c| names(&g, c)).collect();
        assert_eq!(got, ["AB", "BC", "CD"]);
        assert!(t.running_intersection());
        assert_eq!(t.undirected_count(), 2);
    }

    #[test]
    fn all_circle_graph_has_no_gamma() {
        let g = parse_pmg("nodes: A B C D\nA o-o B\nB o-o C\nA o-o C\nC o-o D").unwrap();
        let t = build_join_tree(&g).unwrap();
        for i in 0..t.len() {
            for j in 0..t.len() {
                assert!(i == j || gamma(&g, &t.cliques[i], &t.cliques[j]).is_none());
            }
        }
    }

    #[test]
    fn sink_elimination_respects_request() {
        let g = parse_pmg("nodes: A B C\nA o-o B\nB o-o C\nA o-o C").unwrap();
        let c = [0, 1, 2];
        for (a, b) in [(0, 1), (1, 0), (2, 0)] {
            let m = orient_clique_to_mag(&g, &c, a, b, EdgeRequest::Directed).unwrap();
            assert!(m.is_directed(a, b));
            assert!(m.is_dag());
        }
        let m = orient_clique_to_mag(&g, &c, 0, 1, EdgeRequest::Bidirected).unwrap();
        assert!(m.edges().iter().all(|&(_, _, x, y)| x == Mark::Arrow && y == Mark::Arrow));
    }

    #[test]
    fn inadmissible_request() {
        let g = parse_pmg("nodes: A B\nA o-> B").unwrap();
        assert!(matches!(
            sample_mag(&g, 0, 1, EdgeRequest::Reverse),
            Err(ChordalError::InadmissibleRequest { .. })
        ));
        let s = sample_mag(&g, 0, 1, EdgeRequest::Bidirected).unwrap();
        assert!(s.mag.is_bidirected(0, 1));
    }

    #[test]
    fn single_edge_bidirected() {
        let g = parse_pmg("nodes: A B\nA o-o B").unwrap();
        let s = sample_mag(&g, 0, 1, EdgeRequest::Bidirected).unwrap();
        assert!(s.mag.is_bidirected(0, 1));
        assert_eq!(s.method, SampleMethod::Construction);
    }

    #[test]
    fn request_keywords_round_trip() {
        for r in EdgeRequest::ALL {
            assert_eq!(r.keyword().parse::<EdgeRequest>().unwrap(), r);
        }
        assert!("up".parse::<EdgeRequest>().is_err());
    }
}
