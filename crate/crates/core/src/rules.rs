// SPDX-License-Identifier: Apache-2.0
//! Orientation rules and the fixpoint closure engine.
//!
//! Each rule is a pattern matcher returning orientation commands
//! `(x, y, mark)`, read as "set the mark at `y` on the edge `x - y`".
//! [`close_under`] applies rules until none of them changes the graph.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::graph::{GraphError, Mark, Pmg};
use crate::paths::{
    almost_discriminating_paths_with, discriminating_paths, upd_endpoints_via, walk_upd,
    ShortPathMode,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    R1,
    R2,
    R3,
    ZhaoR4,
    R4,
    R8,
    R9,
    R10,
    R11,
    R12,
    R13,
}

impl RuleId {
    pub const ALL: [RuleId; 11] = [
        RuleId::R1,
        RuleId::R2,
        RuleId::R3,
        RuleId::ZhaoR4,
        RuleId::R4,
        RuleId::R8,
        RuleId::R9,
        RuleId::R10,
        RuleId::R11,
        RuleId::R12,
        RuleId::R13,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::R1 => "R1",
            RuleId::R2 => "R2",
            RuleId::R3 => "R3",
            RuleId::ZhaoR4 => "ZhaoR4",
            RuleId::R4 => "R4",
            RuleId::R8 => "R8",
            RuleId::R9 => "R9",
            RuleId::R10 => "R10",
            RuleId::R11 => "R11",
            RuleId::R12 => "R12",
            RuleId::R13 => "R13",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleId::ALL
            .into_iter()
            .find(|r| r.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown rule `{s}`"))
    }
}

impl Serialize for RuleId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// Rules used when turning a MAG into its essential graph.
pub const ESSENTIAL_RULES: &[RuleId] = &[
    RuleId::R1,
    RuleId::R2,
    RuleId::R3,
    RuleId::ZhaoR4,
    RuleId::R8,
    RuleId::R9,
    RuleId::R10,
];

/// Rules used after adding knowledge.
pub const KNOWLEDGE_RULES: &[RuleId] = &[
    RuleId::R1,
    RuleId::R2,
    RuleId::R4,
    RuleId::R8,
    RuleId::R10,
    RuleId::R11,
    RuleId::R12,
    RuleId::R13,
];

/// Every rule except the discriminating-path special case, which the
/// almost-discriminating version subsumes.
pub const ALL_RULES: &[RuleId] = &[
    RuleId::R1,
    RuleId::R2,
    RuleId::R3,
    RuleId::R4,
    RuleId::R8,
    RuleId::R9,
    RuleId::R10,
    RuleId::R11,
    RuleId::R12,
    RuleId::R13,
];

// cheap rules first
const SCHEDULE: [RuleId; 11] = [
    RuleId::R1,
    RuleId::R2,
    RuleId::R3,
    RuleId::R8,
    RuleId::R11,
    RuleId::R12,
    RuleId::R9,
    RuleId::R10,
    RuleId::R13,
    RuleId::ZhaoR4,
    RuleId::R4,
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RuleOptions {
    pub short_path_mode: ShortPathMode,
}

/// One matched command with the nodes that witnessed it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Firing {
    pub witness: Vec<usize>,
    pub x: usize,
    pub y: usize,
    pub mark: Mark,
    pub rule: RuleId,
}

/// A trace entry. `rule` is `None` for marks asserted as knowledge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub rule: Option<RuleId>,
    pub witness: Vec<usize>,
    pub x: usize,
    pub y: usize,
    pub mark: Mark,
}

impl TraceEntry {
    pub fn to_json(&self, g: &Pmg) -> serde_json::Value {
        let names = |v: &[usize]| v.iter().map(|&i| g.name(i).to_string()).collect::<Vec<_>>();
        serde_json::json!({
            "rule": self.rule.map_or("knowledge", RuleId::as_str),
            "witness": names(&self.witness),
            "edge": [g.name(self.x), g.name(self.y)],
            "mark": self.mark,
        })
    }
}

/// JSON lines, one object per applied command.
pub fn trace_to_jsonl(g: &Pmg, trace: &[TraceEntry]) -> String {
    trace
        .iter()
        .map(|t| t.to_json(g).to_string() + "\n")
        .collect()
}

/// Re-applies a trace to `g`.
pub fn replay(g: &Pmg, trace: &[TraceEntry]) -> Result<Pmg, GraphError> {
    let mut h = g.clone();
    for t in trace {
        h.set_mark(t.x, t.y, t.mark)?;
    }
    Ok(h)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{rule} conflicts with an existing mark: {source}")]
pub struct Conflict {
    pub rule: RuleId,
    pub firing: Firing,
    #[source]
    pub source: GraphError,
    pub trace: Vec<TraceEntry>,
}

/// All commands of `rule` that would change `g`, sorted by witness.
pub fn fire(rule: RuleId, g: &Pmg) -> Vec<Firing> {
    fire_with(rule, g, &RuleOptions::default())
}

pub fn fire_with(rule: RuleId, g: &Pmg, opts: &RuleOptions) -> Vec<Firing> {
    let mut out = Vec::new();
    let mut emit = |witness: Vec<usize>, cmds: &[(usize, usize, Mark)]| {
        for &(x, y, mark) in cmds {
            if g.mark(x, y) != Some(mark) {
                out.push(Firing {
                    witness: witness.clone(),
                    x,
                    y,
                    mark,
                    rule,
                });
            }
        }
    };
    match rule {
        RuleId::R1 => r1(g, &mut emit),
        RuleId::R2 => r2(g, &mut emit),
        RuleId::R3 => r3(g, &mut emit),
        RuleId::ZhaoR4 => r4(g, false, opts, &mut emit),
        RuleId::R4 => r4(g, true, opts, &mut emit),
        RuleId::R8 => r8(g, &mut emit),
        RuleId::R9 => r9(g, &mut emit),
        RuleId::R10 => r10(g, &mut emit),
        RuleId::R11 => r11(g, &mut emit),
        RuleId::R12 => r12(g, &mut emit),
        RuleId::R13 => r13(g, &mut emit),
    }
    out.sort();
    let mut seen = std::collections::HashSet::new();
    out.retain(|f| seen.insert((f.x, f.y, f.mark)));
    out
}

type Emit<'a> = dyn FnMut(Vec<usize>, &[(usize, usize, Mark)]) + 'a;

fn directed(x: usize, y: usize) -> [(usize, usize, Mark); 2] {
    [(y, x, Mark::Tail), (x, y, Mark::Arrow)]
}

// A *-> B o-* C, A, C not adjacent => B --> C
fn r1(g: &Pmg, emit: &mut Emit) {
    for b in 0..g.n() {
        for &a in g.neighbors(b) {
            if !g.arrow_at(a, b) {
                continue;
            }
            for &c in g.neighbors(b) {
                if c != a && g.circle_at(c, b) && !g.adjacent(a, c) {
                    emit(vec![a, b, c], &directed(b, c));
                }
            }
        }
    }
}

// A --> B *-> C or A *-> B --> C, and A *-o C => A *-> C
fn r2(g: &Pmg, emit: &mut Emit) {
    for a in 0..g.n() {
        for &c in g.neighbors(a) {
            if !g.circle_at(a, c) {
                continue;
            }
            let hit = g.neighbors(a).iter().copied().find(|&b| {
                b != c
                    && g.adjacent(b, c)
                    && ((g.is_directed(a, b) && g.arrow_at(b, c))
                        || (g.arrow_at(a, b) && g.is_directed(b, c)))
            });
            if let Some(b) = hit {
                emit(vec![a, b, c], &[(a, c, Mark::Arrow)]);
            }
        }
    }
}

// A *-> B <-* C, A *-o D o-* C, A, C not adjacent, D *-o B => D *-> B
fn r3(g: &Pmg, emit: &mut Emit) {
    for b in 0..g.n() {
        let nb = g.neighbors(b);
        for &d in nb {
            if !g.circle_at(d, b) {
                continue;
            }
            'pairs: for (i, &a) in nb.iter().enumerate() {
                if a == d || !g.arrow_at(a, b) || !g.circle_at(a, d) {
                    continue;
                }
                for &c in &nb[i + 1..] {
                    if c != d && g.arrow_at(c, b) && g.circle_at(c, d) && !g.adjacent(a, c) {
                        emit(vec![a, b, c, d], &[(d, b, Mark::Arrow)]);
                        break 'pairs;
                    }
                }
            }
        }
    }
}

// (almost) discriminating path for Qk with Qk o-* B => Qk --> B
fn r4(g: &Pmg, almost: bool, opts: &RuleOptions, emit: &mut Emit) {
    for qk in 0..g.n() {
        for &b in g.neighbors(qk) {
            if !g.circle_at(b, qk) {
                continue;
            }
            let paths = if almost {
                almost_discriminating_paths_with(g, qk, b, opts.short_path_mode)
            } else {
                discriminating_paths(g, qk, b)
            };
            if let Some(p) = paths.into_iter().next() {
                emit(p, &directed(qk, b));
            }
        }
    }
}

// A --> B --> C and A o-> C => A --> C
fn r8(g: &Pmg, emit: &mut Emit) {
    for a in 0..g.n() {
        for &c in g.neighbors(a) {
            if !g.is_partially_directed(a, c) {
                continue;
            }
            if let Some(&b) = g
                .neighbors(a)
                .iter()
                .find(|&&b| g.is_directed(a, b) && g.is_directed(b, c))
            {
                emit(vec![a, b, c], &[(c, a, Mark::Tail)]);
            }
        }
    }
}

// A o-> C and an unshielded possibly directed path <A, B, D, .., C> with
// B, C not adjacent => A --> C
fn r9(g: &Pmg, emit: &mut Emit) {
    for a in 0..g.n() {
        for &c in g.neighbors(a) {
            if !g.is_partially_directed(a, c) {
                continue;
            }
            if let Some(p) = r9_path(g, a, c) {
                emit(p, &[(c, a, Mark::Tail)]);
            }
        }
    }
}

fn r9_path(g: &Pmg, a: usize, c: usize) -> Option<Vec<usize>> {
    let mut on = vec![false; g.n()];
    on[a] = true;
    for &b in g.neighbors(a) {
        if b == c || g.adjacent(b, c) || g.arrow_at(b, a) {
            continue;
        }
        on[b] = true;
        let mut path = vec![a, b];
        let mut found = None;
        walk_upd(g, &mut path, &mut on, &mut |p| {
            if found.is_some() {
                return false;
            }
            if *p.last().unwrap() == c {
                found = Some(p.to_vec());
                return false;
            }
            true
        });
        on[b] = false;
        if found.is_some() {
            return found;
        }
    }
    None
}

// A o-> C, B --> C <-- D, unshielded possibly directed paths from A to B and
// from A to D whose second nodes differ and are not adjacent => A --> C
fn r10(g: &Pmg, emit: &mut Emit) {
    for a in 0..g.n() {
        let heads: Vec<(usize, Vec<bool>)> = {
            let mut v = Vec::new();
            for &c in g.neighbors(a) {
                if g.is_partially_directed(a, c) {
                    v = g
                        .neighbors(a)
                        .iter()
                        .map(|&m| (m, upd_endpoints_via(g, a, m)))
                        .filter(|(_, r)| r.iter().any(|&x| x))
                        .collect();
                    break;
                }
            }
            v
        };
        if heads.is_empty() {
            continue;
        }
        for &c in g.neighbors(a) {
            if !g.is_partially_directed(a, c) {
                continue;
            }
            let pa = g.parents(c);
            let hit = (|| {
                for (i, &b) in pa.iter().enumerate() {
                    for &d in &pa[i + 1..] {
                        for (m1, r1) in &heads {
                            if !r1[b] {
                                continue;
                            }
                            for (m2, r2) in &heads {
                                if r2[d] && m1 != m2 && !g.adjacent(*m1, *m2) {
                                    return Some(vec![a, c, b, d, *m1, *m2]);
                                }
                            }
                        }
                    }
                }
                None
            })();
            if let Some(w) = hit {
                emit(w, &[(c, a, Mark::Tail)]);
            }
        }
    }
}

// induced subgraph: B *-> C --> D, A o-* D, A *-* B, A *-* C, B, D not
// adjacent => A --> D
fn r11(g: &Pmg, emit: &mut Emit) {
    for c in 0..g.n() {
        for d in g.children(c) {
            for &a in g.neighbors(d) {
                if a == c || !g.circle_at(d, a) || !g.adjacent(a, c) {
                    continue;
                }
                if let Some(&b) = g.neighbors(c).iter().find(|&&b| {
                    b != a && b != d && g.arrow_at(b, c) && g.adjacent(a, b) && !g.adjacent(b, d)
                }) {
                    emit(vec![a, b, c, d], &directed(a, d));
                }
            }
        }
    }
}

// unshielded V1 o-o V2 o-o .. V_{i-1} o-* Vi, i > 2, and Vi --> X <-> V1
// with X off the path => V1 <-* V2
fn r12(g: &Pmg, emit: &mut Emit) {
    let n = g.n();
    for v1 in 0..n {
        let spouses: Vec<usize> = g
            .neighbors(v1)
            .iter()
            .copied()
            .filter(|&x| g.is_bidirected(v1, x))
            .collect();
        if spouses.is_empty() {
            continue;
        }
        for &v2 in g.neighbors(v1) {
            if !g.is_nondirected(v1, v2) {
                continue;
            }
            if let Some(w) = r12_search(g, v1, v2, &spouses) {
                emit(w, &[(v2, v1, Mark::Arrow)]);
            }
        }
    }
}

fn r12_search(g: &Pmg, v1: usize, v2: usize, spouses: &[usize]) -> Option<Vec<usize>> {
    let mut on = vec![false; g.n()];
    on[v1] = true;
    on[v2] = true;
    let mut path = vec![v1, v2];
    fn go(g: &Pmg, path: &mut Vec<usize>, on: &mut [bool], spouses: &[usize]) -> Option<Vec<usize>> {
        let u = *path.last().unwrap();
        let prev = path[path.len() - 2];
        for &w in g.neighbors(u) {
            if on[w] || g.adjacent(prev, w) || !g.circle_at(w, u) {
                continue;
            }
            // w as Vi
            for &x in spouses {
                if x != w && !on[x] && g.is_directed(w, x) {
                    let mut wit = path.clone();
                    wit.push(w);
                    wit.push(x);
                    return Some(wit);
                }
            }
            if g.is_nondirected(u, w) {
                on[w] = true;
                path.push(w);
                let r = go(g, path, on, spouses);
                path.pop();
                on[w] = false;
                if r.is_some() {
                    return r;
                }
            }
        }
        None
    }
    go(g, &mut path, &mut on, spouses)
}

// A o-* B, C <-> A <-> D, unshielded C <-o V1 o-o .. o-o Vk o-> D with k > 1,
// and unshielded possibly directed paths <A, B, .., Vi> for every i
// => A <-* B
fn r13(g: &Pmg, emit: &mut Emit) {
    let n = g.n();
    for a in 0..n {
        let spouses: Vec<usize> = g
            .neighbors(a)
            .iter()
            .copied()
            .filter(|&x| g.is_bidirected(a, x))
            .collect();
        if spouses.len() < 2 {
            continue;
        }
        for &b in g.neighbors(a) {
            if !g.circle_at(b, a) {
                continue;
            }
            let reach = upd_endpoints_via(g, a, b);
            let mut hit = None;
            'outer: for &c in &spouses {
                for &d in &spouses {
                    if c == d || c == b || d == b {
                        continue;
                    }
                    if let Some(vs) = r13_path(g, [a, b, c, d], &reach) {
                        let mut w = vec![a, b, c, d];
                        w.extend(vs);
                        hit = Some(w);
                        break 'outer;
                    }
                }
            }
            if let Some(w) = hit {
                emit(w, &[(b, a, Mark::Arrow)]);
            }
        }
    }
}

fn r13_path(g: &Pmg, abcd: [usize; 4], reach: &[bool]) -> Option<Vec<usize>> {
    let [_, _, c, d] = abcd;
    let mut on = vec![false; g.n()];
    for v in abcd {
        on[v] = true;
    }
    fn go(
        g: &Pmg,
        c: usize,
        d: usize,
        path: &mut Vec<usize>,
        on: &mut [bool],
        reach: &[bool],
    ) -> Option<Vec<usize>> {
        let u = *path.last().unwrap();
        let prev = if path.len() >= 2 { path[path.len() - 2] } else { c };
        // close with Vk o-> D
        if path.len() >= 2
            && g.is_partially_directed(u, d)
            && !g.adjacent(prev, d)
        {
            return Some(path.clone());
        }
        for &w in g.neighbors(u) {
            if on[w] || !reach[w] || !g.is_nondirected(u, w) || g.adjacent(prev, w) {
                continue;
            }
            on[w] = true;
            path.push(w);
            let r = go(g, c, d, path, on, reach);
            path.pop();
            on[w] = false;
            if r.is_some() {
                return r;
            }
        }
        None
    }
    for &v1 in g.neighbors(c) {
        // C <-o V1
        if on[v1] || !reach[v1] || !(g.arrow_at(v1, c) && g.circle_at(c, v1)) {
            continue;
        }
        on[v1] = true;
        let mut path = vec![v1];
        let r = go(g, c, d, &mut path, &mut on, reach);
        on[v1] = false;
        if r.is_some() {
            return r;
        }
    }
    None
}

/// Closure under `rules` with default options.
pub fn close_under(g: &Pmg, rules: &[RuleId]) -> Result<(Pmg, Vec<TraceEntry>), Conflict> {
    close_under_with(g, rules, &RuleOptions::default())
}

/// Applies the rules until none changes the graph. Rules are tried in a
/// fixed cheap-first order; after any change the scan restarts.
pub fn close_under_with(
    g: &Pmg,
    rules: &[RuleId],
    opts: &RuleOptions,
) -> Result<(Pmg, Vec<TraceEntry>), Conflict> {
    let order: Vec<RuleId> = SCHEDULE.iter().copied().filter(|r| rules.contains(r)).collect();
    close_in_order(g, &order, opts)
}

/// Like [`close_under_with`] but with a caller-chosen rule order. Used to
/// check that the fixpoint does not depend on the order.
pub fn close_in_order(
    g: &Pmg,
    order: &[RuleId],
    opts: &RuleOptions,
) -> Result<(Pmg, Vec<TraceEntry>), Conflict> {
    let mut cur = g.clone();
    let mut trace = Vec::new();
    'scan: loop {
        for &rule in order {
            let firings = fire_with(rule, &cur, opts);
            let mut changed = false;
            for f in firings {
                match cur.set_mark(f.x, f.y, f.mark) {
                    Ok(true) => {
                        changed = true;
                        trace.push(TraceEntry {
                            rule: Some(rule),
                            witness: f.witness.clone(),
                            x: f.x,
                            y: f.y,
                            mark: f.mark,
                        });
                    }
                    Ok(false) => {}
                    Err(source) => {
                        return Err(Conflict {
                            rule,
                            firing: f,
                            source,
                            trace,
                        })
                    }
                }
            }
            if changed {
                continue 'scan;
            }
        }
        return Ok((cur, trace));
    }
}

/// Whether no rule in `rules` would change `g`.
pub fn is_closed(g: &Pmg, rules: &[RuleId]) -> bool {
    rules.iter().all(|&r| fire(r, g).is_empty())
}
