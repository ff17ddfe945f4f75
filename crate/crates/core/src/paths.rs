// SPDX-License-Identifier: Apache-2.0
//! Path machinery: m-separation, collider paths, minimal collider paths,
//! discriminating and inducing paths, almost collider paths and unshielded
//! possibly directed paths.
//!
//! Paths are node sequences `Vec<usize>` over the host graph.

use crate::graph::{mask_to_vec, Mark, Pmg};

/// Whether `p` is a path: consecutive nodes adjacent, all nodes distinct.
pub fn is_path(g: &Pmg, p: &[usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut seen = vec![false; g.n()];
    for &v in p {
        if std::mem::replace(&mut seen[v], true) {
            return false;
        }
    }
    p.windows(2).all(|w| g.adjacent(w[0], w[1]))
}

/// `b` is a collider on `a - b - c`.
pub fn is_collider(g: &Pmg, a: usize, b: usize, c: usize) -> bool {
    g.arrow_at(a, b) && g.arrow_at(c, b)
}

/// `b` is a definite non-collider on `a - b - c`.
pub fn is_definite_noncollider(g: &Pmg, a: usize, b: usize, c: usize) -> bool {
    g.tail_at(a, b)
        || g.tail_at(c, b)
        || (g.circle_at(a, b) && g.circle_at(c, b) && !g.adjacent(a, c))
}

/// Every non-endpoint of `p` is a collider.
pub fn is_collider_path(g: &Pmg, p: &[usize]) -> bool {
    is_path(g, p) && p.windows(3).all(|w| is_collider(g, w[0], w[1], w[2]))
}

/// Every successive triple of `p` is unshielded.
pub fn is_unshielded(g: &Pmg, p: &[usize]) -> bool {
    p.windows(3).all(|w| !g.adjacent(w[0], w[2]))
}

/// No edge of `p` has an arrowhead at its earlier node.
pub fn is_possibly_directed(g: &Pmg, p: &[usize]) -> bool {
    p.windows(2).all(|w| g.mark(w[1], w[0]) != Some(Mark::Arrow))
}

// ---------------------------------------------------------------------------
// m-separation

/// Whether `a` and `b` are m-separated given `z`.
///
/// Graphs without circle marks use a reachability search. Graphs with circles
/// enumerate definite status paths, which is exponential and meant for small
/// graphs only.
pub fn m_separated(g: &Pmg, a: usize, b: usize, z: &[usize]) -> bool {
    if g.has_circles() {
        !definite_status_connected(g, a, b, z)
    } else {
        !reachable_given(g, a, z)[b]
    }
}

/// Nodes m-connected to `a` given `z` in a graph without circles.
pub fn reachable_given(g: &Pmg, a: usize, z: &[usize]) -> Vec<bool> {
    let n = g.n();
    let mut in_z = vec![false; n];
    for &v in z {
        in_z[v] = true;
    }
    let an_z = g.ancestor_mask(z);
    // state: (node, arrived with an arrowhead at node)
    let mut seen = vec![[false; 2]; n];
    let mut out = vec![false; n];
    let mut stack = Vec::new();
    for &v in g.neighbors(a) {
        let h = g.arrow_at(a, v) as usize;
        if !seen[v][h] {
            seen[v][h] = true;
            stack.push((v, h == 1, a));
        }
    }
    while let Some((v, head, _)) = stack.pop() {
        if v == a {
            continue;
        }
        out[v] = true;
        for &w in g.neighbors(v) {
            let collider = head && g.arrow_at(w, v);
            let pass = if collider { an_z[v] } else { !in_z[v] };
            if !pass {
                continue;
            }
            let h = g.arrow_at(v, w) as usize;
            if !seen[w][h] {
                seen[w][h] = true;
                stack.push((w, h == 1, v));
            }
        }
    }
    out
}

fn definite_status_connected(g: &Pmg, a: usize, b: usize, z: &[usize]) -> bool {
    let n = g.n();
    let mut in_z = vec![false; n];
    for &v in z {
        in_z[v] = true;
    }
    let an_z = g.ancestor_mask(z);
    let mut on = vec![false; n];
    on[a] = true;
    let mut path = vec![a];
    fn go(
        g: &Pmg,
        b: usize,
        in_z: &[bool],
        an_z: &[bool],
        on: &mut [bool],
        path: &mut Vec<usize>,
    ) -> bool {
        let v = *path.last().unwrap();
        for &w in g.neighbors(v) {
            if on[w] {
                continue;
            }
            if path.len() >= 2 {
                let u = path[path.len() - 2];
                let ok = if is_collider(g, u, v, w) {
                    an_z[v]
                } else if is_definite_noncollider(g, u, v, w) {
                    !in_z[v]
                } else {
                    false
                };
                if !ok {
                    continue;
                }
            }
            if w == b {
                return true;
            }
            on[w] = true;
            path.push(w);
            let found = go(g, b, in_z, an_z, on, path);
            path.pop();
            on[w] = false;
            if found {
                return true;
            }
        }
        false
    }
    go(g, b, &in_z, &an_z, &mut on, &mut path)
}

// ---------------------------------------------------------------------------
// collider paths

/// Whether some proper subsequence of `p` that keeps both endpoints is itself
/// a collider path.
pub fn has_collider_subsequence(g: &Pmg, p: &[usize]) -> bool {
    let k = p.len();
    if k < 3 {
        return false;
    }
    // reach[i][j][s]: a collider path subsequence p0 .. p_i p_j exists, s = skipped a node
    let mut reach = vec![vec![[false; 2]; k]; k];
    for j in 1..k {
        if g.adjacent(p[0], p[j]) {
            reach[0][j][(j > 1) as usize] = true;
        }
    }
    for i in 0..k {
        for j in i + 1..k {
            for s in 0..2 {
                if !reach[i][j][s] || j == k - 1 {
                    continue;
                }
                if !g.arrow_at(p[i], p[j]) {
                    continue;
                }
                for l in j + 1..k {
                    if g.adjacent(p[j], p[l]) && g.arrow_at(p[l], p[j]) {
                        let skipped = s == 1 || l > j + 1;
                        reach[j][l][skipped as usize] = true;
                    }
                }
            }
        }
    }
    (0..k - 1).any(|i| reach[i][k - 1][1])
}

/// Minimal collider path check.
pub fn is_minimal_collider_path(g: &Pmg, p: &[usize]) -> bool {
    p.len() >= 3
        && is_collider_path(g, p)
        && !g.adjacent(p[0], p[p.len() - 1])
        && !has_collider_subsequence(g, p)
}

/// Puts the smaller endpoint first.
pub fn canonical(mut p: Vec<usize>) -> Vec<usize> {
    if p.first() > p.last() {
        p.reverse();
    }
    p
}

/// All minimal collider paths, canonical and sorted.
pub fn minimal_collider_paths(g: &Pmg) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let n = g.n();
    let mut on = vec![false; n];
    for s in 0..n {
        for &v in g.neighbors(s) {
            if !g.arrow_at(s, v) {
                continue;
            }
            let mut path = vec![s, v];
            on[s] = true;
            on[v] = true;
            mcp_extend(g, &mut path, &mut on, &mut out);
            on[s] = false;
            on[v] = false;
        }
    }
    out.sort();
    out
}

fn mcp_extend(g: &Pmg, path: &mut Vec<usize>, on: &mut [bool], out: &mut Vec<Vec<usize>>) {
    let v = *path.last().unwrap();
    let s = path[0];
    for &w in g.neighbors(v) {
        if on[w] || !g.arrow_at(w, v) {
            continue;
        }
        path.push(w);
        if s < w && !g.adjacent(s, w) && !has_collider_subsequence(g, path) {
            out.push(path.clone());
        }
        // extend only while the prefix itself has no shortcut through an
        // interior node, which would also shortcut every extension
        if g.arrow_at(v, w) && !interior_shortcut(g, path) {
            on[w] = true;
            mcp_extend(g, path, on, out);
            on[w] = false;
        }
        path.pop();
    }
}

// A collider subsequence between p0 and the last node that skips something
// survives any extension that keeps the last node a collider, so such
// prefixes cannot lead to minimal paths. The last node is always a collider
// of the extension (arrowheads from both sides), so checking the prefix with
// its own endpoint is enough.
fn interior_shortcut(g: &Pmg, p: &[usize]) -> bool {
    has_collider_subsequence_into_last(g, p)
}

// Like `has_collider_subsequence`, but the final edge must carry an arrowhead
// at the last node so the subsequence stays a collider path when extended.
fn has_collider_subsequence_into_last(g: &Pmg, p: &[usize]) -> bool {
    let k = p.len();
    if k < 3 {
        return false;
    }
    let mut reach = vec![vec![[false; 2]; k]; k];
    for j in 1..k {
        if g.adjacent(p[0], p[j]) {
            reach[0][j][(j > 1) as usize] = true;
        }
    }
    for i in 0..k {
        for j in i + 1..k - 1 {
            for s in 0..2 {
                if !reach[i][j][s] || !g.arrow_at(p[i], p[j]) {
                    continue;
                }
                for l in j + 1..k {
                    if g.adjacent(p[j], p[l]) && g.arrow_at(p[l], p[j]) {
                        let skipped = s == 1 || l > j + 1;
                        reach[j][l][skipped as usize] = true;
                    }
                }
            }
        }
    }
    (0..k - 1).any(|i| reach[i][k - 1][1] && g.arrow_at(p[i], p[k - 1]))
}

// ---------------------------------------------------------------------------
// discriminating paths

/// Discriminating paths `<A, Q1, .., Qk, B>` for `qk` ending in `b`.
/// Returned as full node sequences `A .. Qk B`, sorted.
pub fn discriminating_paths(g: &Pmg, qk: usize, b: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if !g.adjacent(qk, b) {
        return out;
    }
    let mut on = vec![false; g.n()];
    on[qk] = true;
    on[b] = true;
    // rev holds Qk, Q_{k-1}, .. backwards
    let mut rev = vec![qk];
    disc_extend(g, b, &mut rev, &mut on, &mut out);
    out.sort();
    out
}

fn disc_extend(g: &Pmg, b: usize, rev: &mut Vec<usize>, on: &mut [bool], out: &mut Vec<Vec<usize>>) {
    let h = *rev.last().unwrap();
    for &x in g.neighbors(h) {
        if on[x] {
            continue;
        }
        // h is an interior collider unless it is Qk
        if rev.len() >= 2 && !g.arrow_at(x, h) {
            continue;
        }
        if !g.adjacent(x, b) {
            if rev.len() >= 2 {
                let mut p: Vec<usize> = vec![x];
                p.extend(rev.iter().rev());
                p.push(b);
                out.push(p);
            }
        } else if g.is_directed(x, b) && g.arrow_at(h, x) {
            on[x] = true;
            rev.push(x);
            disc_extend(g, b, rev, on, out);
            rev.pop();
            on[x] = false;
        }
    }
}

/// `(path, Qk)` for every discriminating path whose `Qk` is a collider on it.
pub fn discriminated_colliders(g: &Pmg) -> Vec<(Vec<usize>, usize)> {
    let mut out = Vec::new();
    for (x, y, _, _) in g.edges() {
        for (qk, b) in [(x, y), (y, x)] {
            for p in discriminating_paths(g, qk, b) {
                let q_prev = p[p.len() - 3];
                if is_collider(g, q_prev, qk, b) {
                    out.push((p, qk));
                }
            }
        }
    }
    out.sort();
    out
}

// ---------------------------------------------------------------------------
// inducing paths

/// Whether a collider path between non-adjacent `a` and `b` exists whose
/// interior lies in `allowed`.
fn collider_path_within(g: &Pmg, a: usize, b: usize, allowed: &[bool]) -> bool {
    let n = g.n();
    // state (prev, cur), arrival at cur from prev
    let mut seen = vec![false; n * n];
    let mut stack = Vec::new();
    for &v in g.neighbors(a) {
        if v != b && allowed[v] && g.arrow_at(a, v) {
            seen[a * n + v] = true;
            stack.push((a, v));
        }
    }
    while let Some((u, v)) = stack.pop() {
        for &w in g.neighbors(v) {
            if w == u || !g.arrow_at(w, v) {
                continue;
            }
            if w == b {
                return true;
            }
            if w == a || !allowed[w] || !g.arrow_at(v, w) {
                continue;
            }
            if !std::mem::replace(&mut seen[v * n + w], true) {
                stack.push((v, w));
            }
        }
    }
    false
}

/// Inducing path between non-adjacent `a` and `b`: a collider path whose
/// interior nodes are ancestors of `a` or `b`.
pub fn has_inducing_path(g: &Pmg, a: usize, b: usize) -> bool {
    !g.adjacent(a, b) && collider_path_within(g, a, b, &g.ancestor_mask(&[a, b]))
}

/// As [`has_inducing_path`] with possible ancestors.
pub fn has_possible_inducing_path(g: &Pmg, a: usize, b: usize) -> bool {
    !g.adjacent(a, b) && collider_path_within(g, a, b, &g.possible_ancestor_mask(&[a, b]))
}

/// No possible inducing path between any non-adjacent pair. For graphs
/// without circles this is the usual maximality condition.
pub fn is_maximal(g: &Pmg) -> bool {
    let n = g.n();
    (0..n).all(|a| (a + 1..n).all(|b| !has_possible_inducing_path(g, a, b)))
}

// ---------------------------------------------------------------------------
// almost collider and almost discriminating paths

/// How the first and last clause combine on a path with a single interior
/// node.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ShortPathMode {
    /// Both clauses must hold.
    #[default]
    Conjunctive,
    /// Either clause suffices.
    Disjunctive,
}

fn m_is(g: &Pmg, x: usize, y: usize, m: Mark) -> bool {
    g.mark(x, y) == Some(m)
}

fn first_clause(g: &Pmg, p: &[usize]) -> bool {
    use Mark::*;
    let (q0, q1, q2) = (p[0], p[1], p[2]);
    is_collider(g, q0, q1, q2)
        || (m_is(g, q0, q1, Arrow)
            && m_is(g, q2, q1, Circle)
            && m_is(g, q1, q2, Arrow)
            && m_is(g, q0, q2, Circle))
        || (m_is(g, q0, q1, Circle) && m_is(g, q2, q1, Arrow) && m_is(g, q0, q2, Arrow))
}

fn inner_clause(g: &Pmg, p: &[usize], i: usize) -> bool {
    use Mark::*;
    let (a, q, c) = (p[i - 1], p[i], p[i + 1]);
    let d = p[i + 2];
    is_collider(g, a, q, c)
        || (m_is(g, a, q, Arrow)
            && m_is(g, c, q, Circle)
            && m_is(g, q, c, Arrow)
            && m_is(g, d, a, Arrow)
            && m_is(g, a, d, Circle))
        || (m_is(g, q, a, Arrow)
            && m_is(g, a, q, Circle)
            && m_is(g, c, q, Arrow)
            && m_is(g, c, a, Circle)
            && m_is(g, a, c, Arrow))
}

fn last_clause(g: &Pmg, p: &[usize]) -> bool {
    use Mark::*;
    let k = p.len() - 1;
    let (a, q, c) = (p[k - 2], p[k - 1], p[k]);
    is_collider(g, a, q, c)
        || (m_is(g, a, q, Arrow) && m_is(g, c, q, Circle) && m_is(g, c, a, Arrow))
        || (m_is(g, q, a, Arrow)
            && m_is(g, a, q, Circle)
            && m_is(g, c, q, Arrow)
            && m_is(g, c, a, Circle))
}

/// Almost collider path check with the default conjunctive reading for a
/// single interior node.
pub fn is_almost_collider_path(g: &Pmg, p: &[usize]) -> bool {
    is_almost_collider_path_with(g, p, ShortPathMode::Conjunctive)
}

pub fn is_almost_collider_path_with(g: &Pmg, p: &[usize], mode: ShortPathMode) -> bool {
    if p.len() < 3 || !is_path(g, p) {
        return false;
    }
    let k = p.len() - 1;
    if k == 2 {
        let (f, l) = (first_clause(g, p), last_clause(g, p));
        return match mode {
            ShortPathMode::Conjunctive => f && l,
            ShortPathMode::Disjunctive => f || l,
        };
    }
    first_clause(g, p) && last_clause(g, p) && (2..=k - 2).all(|i| inner_clause(g, p, i))
}

// Marks at an interior node from its two path neighbours that some clause
// could accept.
fn interior_marks_possible(g: &Pmg, a: usize, q: usize, c: usize) -> bool {
    matches!(
        (g.mark(a, q), g.mark(c, q)),
        (Some(Mark::Arrow), Some(Mark::Arrow))
            | (Some(Mark::Arrow), Some(Mark::Circle))
            | (Some(Mark::Circle), Some(Mark::Arrow))
    )
}

/// Almost discriminating paths `<A, Q1, .., Qk, B>` for `qk`, as full node
/// sequences, sorted.
pub fn almost_discriminating_paths(g: &Pmg, qk: usize, b: usize) -> Vec<Vec<usize>> {
    almost_discriminating_paths_with(g, qk, b, ShortPathMode::Conjunctive)
}

pub fn almost_discriminating_paths_with(
    g: &Pmg,
    qk: usize,
    b: usize,
    mode: ShortPathMode,
) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if !g.adjacent(qk, b) {
        return out;
    }
    let parents_b = g.parents(b);
    let mut on = vec![false; g.n()];
    on[qk] = true;
    on[b] = true;
    let mut rev = vec![qk];
    adisc_extend(g, b, &parents_b, mode, &mut rev, &mut on, &mut out);
    out.sort();
    out
}

fn adisc_extend(
    g: &Pmg,
    b: usize,
    parents_b: &[usize],
    mode: ShortPathMode,
    rev: &mut Vec<usize>,
    on: &mut [bool],
    out: &mut Vec<Vec<usize>>,
) {
    let h = *rev.last().unwrap();
    for &x in g.neighbors(h) {
        if on[x] {
            continue;
        }
        if rev.len() >= 2 && !interior_marks_possible(g, x, h, rev[rev.len() - 2]) {
            continue;
        }
        if !g.adjacent(x, b) {
            if rev.len() >= 2 {
                let mut p: Vec<usize> = vec![x];
                p.extend(rev.iter().rev());
                if is_almost_collider_path_with(g, &p, mode) {
                    p.push(b);
                    out.push(p);
                }
            }
        } else if parents_b.binary_search(&x).is_ok() {
            on[x] = true;
            rev.push(x);
            adisc_extend(g, b, parents_b, mode, rev, on, out);
            rev.pop();
            on[x] = false;
        }
    }
}

// ---------------------------------------------------------------------------
// unshielded possibly directed paths

/// All unshielded possibly directed paths from `a` to `b` with at least
/// `min_nodes` nodes, sorted.
pub fn unshielded_possibly_directed_paths(
    g: &Pmg,
    a: usize,
    b: usize,
    min_nodes: usize,
) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if a == b {
        return out;
    }
    let mut on = vec![false; g.n()];
    on[a] = true;
    let mut path = vec![a];
    walk_upd(g, &mut path, &mut on, &mut |p| {
        if *p.last().unwrap() == b {
            if p.len() >= min_nodes.max(2) {
                out.push(p.to_vec());
            }
            false
        } else {
            true
        }
    });
    out.sort();
    out
}

/// Depth-first walk over unshielded possibly directed paths extending
/// `path`. `visit` is called on each new path and returns whether to extend it.
pub fn walk_upd(
    g: &Pmg,
    path: &mut Vec<usize>,
    on: &mut [bool],
    visit: &mut dyn FnMut(&[usize]) -> bool,
) {
    let v = *path.last().unwrap();
    for &w in g.neighbors(v) {
        if on[w] || g.arrow_at(w, v) {
            continue;
        }
        if path.len() >= 2 && g.adjacent(path[path.len() - 2], w) {
            continue;
        }
        path.push(w);
        if visit(path) {
            on[w] = true;
            walk_upd(g, path, on, visit);
            on[w] = false;
        }
        path.pop();
    }
}

/// Endpoints of unshielded possibly directed paths starting with the edge
/// `a - m`, `m` included when that edge is itself possibly directed.
pub fn upd_endpoints_via(g: &Pmg, a: usize, m: usize) -> Vec<bool> {
    let mut reach = vec![false; g.n()];
    if !g.adjacent(a, m) || g.arrow_at(m, a) {
        return reach;
    }
    let mut on = vec![false; g.n()];
    on[a] = true;
    on[m] = true;
    reach[m] = true;
    let mut path = vec![a, m];
    walk_upd(g, &mut path, &mut on, &mut |p| {
        reach[*p.last().unwrap()] = true;
        true
    });
    reach
}

/// Shorthand used by reports.
pub fn render_path(g: &Pmg, p: &[usize]) -> String {
    p.iter().map(|&v| g.name(v)).collect::<Vec<_>>().join(",")
}

/// Sorted node list of a mask.
pub fn members(mask: &[bool]) -> Vec<usize> {
    mask_to_vec(mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pmg::parse_pmg;

    fn g(s: &str) -> Pmg {
        parse_pmg(s).unwrap()
    }

    #[test]
    fn m_separation_small() {
        let m = g("nodes: A B C D\nB --> A\nA --> C\nB --> C\nC --> D\nA --> D");
        assert!(m_separated(&m, 1, 3, &[0, 2]));
        assert!(!m_separated(&m, 1, 3, &[2]));
        let col = g("nodes: A B C\nA --> B\nC --> B");
        assert!(m_separated(&col, 0, 2, &[]));
        assert!(!m_separated(&col, 0, 2, &[1]));
    }

    #[test]
    fn circle_graph_uses_definite_status_paths() {
        // A o-o B o-o C: B is a definite non-collider
        let c = g("nodes: A B C\nA o-o B\nB o-o C");
        assert!(!m_separated(&c, 0, 2, &[]));
        assert!(m_separated(&c, 0, 2, &[1]));
        // shielded triple with circles is not of definite status
        let t = g("nodes: A B C D\nA o-o B\nB o-o C\nA o-o C\nC --> D");
        assert!(!m_separated(&t, 0, 2, &[1]));
    }

    #[test]
    fn mcp_simple() {
        let x = g("nodes: B C D\nB o-> C\nD o-> C");
        assert_eq!(minimal_collider_paths(&x), vec![vec![0, 1, 2]]);
        let none = g("nodes: A B C D\nA o-o B\nA o-o C\nA o-o D\nB o-o C\nC o-o D");
        assert!(minimal_collider_paths(&none).is_empty());
    }

    #[test]
    fn mcp_minimality() {
        // A *-> B <-> C <-* D with A <-> C: <A,C,D> is a shorter collider path
        let x = g("nodes: A B C D\nA --> B\nB <-> C\nD --> C\nA <-> C\nB --> D");
        let mcps = minimal_collider_paths(&x);
        assert!(mcps.contains(&vec![0, 2, 3]));
        assert!(!mcps.contains(&vec![0, 1, 2, 3]));
    }

    #[test]
    fn discriminating_fixture() {
        // A --> Q1 <-> Q2 <-> B, Q1 --> B
        let x = g("nodes: A Q1 Q2 B\nA --> Q1\nQ1 <-> Q2\nQ2 <-> B\nQ1 --> B");
        assert_eq!(discriminating_paths(&x, 2, 3), vec![vec![0, 1, 2, 3]]);
        assert_eq!(discriminated_colliders(&x), vec![(vec![0, 1, 2, 3], 2)]);
        assert_eq!(almost_discriminating_paths(&x, 2, 3), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn inducing_paths() {
        let x = g("nodes: A B C D\nA --> B\nB <-> C\nC <-- D\nB --> D\nC --> A");
        assert!(has_inducing_path(&x, 0, 3));
        assert!(!is_maximal(&x));
        let m = g("nodes: A B C D\nB --> A\nA --> C\nB --> C\nC --> D\nA --> D");
        assert!(is_maximal(&m));
    }

    #[test]
    fn almost_collider_k2_modes() {
        // Q0 *-> Q1 o-> Q2 with Q0 *-o Q2: clause (i)(b) holds, clause (iii) does not
        let x = g("nodes: P Q R\nP --> Q\nQ o-> R\nP o-o R");
        let p = [0, 1, 2];
        assert!(!is_almost_collider_path(&x, &p));
        assert!(is_almost_collider_path_with(&x, &p, ShortPathMode::Disjunctive));
    }

    #[test]
    fn unshielded_possibly_directed() {
        let x = g("nodes: A B C D\nA o-o B\nB o-o C\nC o-o D\nA o-o C");
        let ps = unshielded_possibly_directed_paths(&x, 0, 3, 2);
        assert_eq!(ps, vec![vec![0, 2, 3]]);
        let y = g("nodes: A B C\nA o-o B\nB <-o C");
        assert!(unshielded_possibly_directed_paths(&y, 0, 2, 3).is_empty());
    }
}
