// SPDX-License-Identifier: Apache-2.0
//! Brute-force ground truth over small graphs.
//!
//! MAG enumeration over a skeleton, Markov equivalence decided two ways,
//! equivalence classes, restriction by knowledge and essential graphs by
//! intersection.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{Mark, Pmg};
use crate::knowledge::Piece;
use crate::paths::{is_collider, is_maximal, m_separated, minimal_collider_paths};
use crate::pmg::render_pmg;

/// Default limit on the number of skeleton edges.
pub const DEFAULT_CAP: usize = 12;

/// The three orientations of an edge in a MAG, as (mark at x, mark at y).
const ORIENTATIONS: [(Mark, Mark); 3] = [
    (Mark::Tail, Mark::Arrow),
    (Mark::Arrow, Mark::Tail),
    (Mark::Arrow, Mark::Arrow),
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("skeleton has {edges} edges, the oracle cap is {cap}")]
    CapExceeded { edges: usize, cap: usize },
    #[error("not a MAG: {0}")]
    NotMag(&'static str),
    #[error("the equivalence class is empty")]
    EmptyClass,
    #[error("inconsistent knowledge: no MAG of the class satisfies every piece")]
    InconsistentKnowledge,
    #[error("equivalence deciders disagree on\n{0}\nand\n{1}")]
    MethodDisagreement(String, String),
}

/// An explicit list of MAGs over one skeleton.
#[derive(Clone, Debug)]
pub struct MecClass {
    /// Sorted by rendered text.
    pub graphs: Vec<Pmg>,
    /// What the class was derived from.
    pub source: String,
}

#[derive(Serialize)]
struct MecJson {
    size: usize,
    graphs: Vec<String>,
}

impl MecClass {
    fn from_unsorted(mut graphs: Vec<Pmg>, source: String) -> Self {
        sort_canonical(&mut graphs);
        MecClass { graphs, source }
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn contains(&self, m: &Pmg) -> bool {
        self.graphs.iter().any(|g| g == m)
    }

    /// `{"size": n, "graphs": [...]}`. Graph texts are omitted unless asked.
    pub fn to_json(&self, with_graphs: bool) -> serde_json::Value {
        let graphs = if with_graphs {
            self.graphs.iter().map(render_pmg).collect()
        } else {
            Vec::new()
        };
        serde_json::to_value(MecJson {
            size: self.len(),
            graphs,
        })
        .expect("plain struct")
    }
}

fn sort_canonical(graphs: &mut [Pmg]) {
    graphs.sort_by_cached_key(render_pmg);
}

fn check_cap(g: &Pmg, cap: usize) -> Result<Vec<(usize, usize)>, OracleError> {
    let edges: Vec<(usize, usize)> = g.edges().into_iter().map(|(x, y, _, _)| (x, y)).collect();
    if edges.len() > cap {
        return Err(OracleError::CapExceeded {
            edges: edges.len(),
            cap,
        });
    }
    Ok(edges)
}

/// No circles, ancestral and maximal.
pub fn is_mag(g: &Pmg) -> bool {
    !g.has_circles() && g.is_ancestral() && is_maximal(g)
}

fn check_mag(m: &Pmg) -> Result<(), OracleError> {
    if m.has_circles() {
        Err(OracleError::NotMag("graph has circle marks"))
    } else if !m.is_ancestral() {
        Err(OracleError::NotMag("graph is not ancestral"))
    } else if !is_maximal(m) {
        Err(OracleError::NotMag("graph is not maximal"))
    } else {
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// enumeration

/// All MAGs over the skeleton of `g`, sorted canonically.
///
/// Each of the `3^E` assignments is tested. Work is split by the assignment
/// of the first half of the edges; a prefix whose edges alone already violate
/// ancestrality is skipped as a whole.
pub fn enumerate_mags(g: &Pmg, cap: usize) -> Result<Vec<Pmg>, OracleError> {
    let edges = check_cap(g, cap)?;
    let e = edges.len();
    let head = e.div_ceil(2);
    let tail = e - head;
    let base = g.empty_like();
    let decode = |mut code: usize, range: std::ops::Range<usize>, out: &mut Pmg| {
        for i in range {
            let (x, y) = edges[i];
            let (mx, my) = ORIENTATIONS[code % 3];
            code /= 3;
            out.add_edge(x, y, mx, my).expect("skeleton edges are distinct");
        }
    };
    let mut found: Vec<Pmg> = (0..3usize.pow(head as u32))
        .into_par_iter()
        .flat_map_iter(|pre| {
            let mut prefix = base.clone();
            decode(pre, 0..head, &mut prefix);
            let mut local = Vec::new();
            if prefix.is_ancestral() {
                for suf in 0..3usize.pow(tail as u32) {
                    let mut full = prefix.clone();
                    decode(suf, head..e, &mut full);
                    if full.is_ancestral() && is_maximal(&full) {
                        local.push(full);
                    }
                }
            }
            local
        })
        .collect();
    sort_canonical(&mut found);
    Ok(found)
}

/// A second, recursive generator used to cross-check [`enumerate_mags`].
pub fn enumerate_mags_recursive(g: &Pmg, cap: usize) -> Result<Vec<Pmg>, OracleError> {
    let edges = check_cap(g, cap)?;
    fn go(edges: &[(usize, usize)], cur: &mut Pmg, out: &mut Vec<Pmg>) {
        let Some((&(x, y), rest)) = edges.split_first() else {
            if is_maximal(cur) {
                out.push(cur.clone());
            }
            return;
        };
        for (mx, my) in ORIENTATIONS {
            cur.add_edge(x, y, mx, my).expect("skeleton edges are distinct");
            if cur.ancestral_violation().is_none() {
                go(rest, cur, out);
            }
            cur.remove_edge(x, y);
        }
    }
    let mut out = Vec::new();
    go(&edges, &mut g.empty_like(), &mut out);
    sort_canonical(&mut out);
    Ok(out)
}

/// Backtracking over the skeleton of `template`. `allowed` filters
/// orientations per edge, `keep` prunes a partial graph after an edge is
/// added and `accept` decides complete graphs.
fn search<A, K, C>(
    template: &Pmg,
    edges: &[(usize, usize)],
    allowed: A,
    keep: K,
    accept: C,
) -> Vec<Pmg>
where
    A: Fn(usize, usize, Mark, Mark) -> bool + Sync,
    K: Fn(&Pmg, usize, usize) -> bool + Sync,
    C: Fn(&Pmg) -> bool + Sync,
{
    struct Ctx<'a, A, K, C> {
        edges: &'a [(usize, usize)],
        allowed: A,
        keep: K,
        accept: C,
    }
    fn go<A, K, C>(ctx: &Ctx<'_, A, K, C>, i: usize, cur: &mut Pmg, out: &mut Vec<Pmg>)
    where
        A: Fn(usize, usize, Mark, Mark) -> bool,
        K: Fn(&Pmg, usize, usize) -> bool,
        C: Fn(&Pmg) -> bool,
    {
        let Some(&(x, y)) = ctx.edges.get(i) else {
            if (ctx.accept)(cur) {
                out.push(cur.clone());
            }
            return;
        };
        for (mx, my) in ORIENTATIONS {
            if !(ctx.allowed)(x, y, mx, my) {
                continue;
            }
            cur.add_edge(x, y, mx, my).expect("skeleton edges are distinct");
            if cur.ancestral_violation().is_none() && (ctx.keep)(cur, x, y) {
                go(ctx, i + 1, cur, out);
            }
            cur.remove_edge(x, y);
        }
    }
    let ctx = Ctx {
        edges,
        allowed,
        keep,
        accept,
    };
    let base = template.empty_like();
    if edges.is_empty() {
        let mut out = Vec::new();
        go(&ctx, 0, &mut base.clone(), &mut out);
        return out;
    }
    // split by the first edge
    let (x, y) = edges[0];
    ORIENTATIONS
        .par_iter()
        .flat_map_iter(|&(mx, my)| {
            let mut out = Vec::new();
            if (ctx.allowed)(x, y, mx, my) {
                let mut cur = base.clone();
                cur.add_edge(x, y, mx, my).expect("fresh graph");
                if cur.ancestral_violation().is_none() && (ctx.keep)(&cur, x, y) {
                    go(&ctx, 1, &mut cur, &mut out);
                }
            }
            out
        })
        .collect()
}

/// Unshielded triples through the new edge `x - y` agree in collider status
/// with `reference`.
fn triples_agree(cur: &Pmg, reference: &Pmg, x: usize, y: usize) -> bool {
    for (a, b) in [(x, y), (y, x)] {
        for &c in cur.neighbors(b) {
            if c != a
                && !reference.adjacent(a, c)
                && is_collider(cur, a, b, c) != is_collider(reference, a, b, c)
            {
                return false;
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// equivalence

/// The m-separation relation over all `(a, b, Z)` with `a < b`, one bit per
/// query. Exponential in the number of nodes.
pub fn msep_signature(m: &Pmg) -> Vec<bool> {
    let n = m.n();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let rest: Vec<usize> = (0..n).filter(|&v| v != a && v != b).collect();
            for bits in 0..1usize << rest.len() {
                let z: Vec<usize> = rest
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| bits >> i & 1 == 1)
                    .map(|(_, &v)| v)
                    .collect();
                out.push(m_separated(m, a, b, &z));
            }
        }
    }
    out
}

/// Same skeleton and same minimal collider paths.
pub fn equivalent_by_mcps(m1: &Pmg, m2: &Pmg) -> bool {
    m1.same_skeleton(m2) && minimal_collider_paths(m1) == minimal_collider_paths(m2)
}

/// Identical m-separation relations.
pub fn equivalent_by_msep(m1: &Pmg, m2: &Pmg) -> bool {
    m1.n() == m2.n() && msep_signature(m1) == msep_signature(m2)
}

/// Markov equivalence decided by both methods. A disagreement is reported as
/// an error.
pub fn markov_equivalent(m1: &Pmg, m2: &Pmg) -> Result<bool, OracleError> {
    let a = equivalent_by_mcps(m1, m2);
    let b = equivalent_by_msep(m1, m2);
    if a != b {
        return Err(OracleError::MethodDisagreement(
            render_pmg(m1),
            render_pmg(m2),
        ));
    }
    Ok(a)
}

/// The Markov equivalence class of the MAG `m`.
pub fn mec(m: &Pmg, cap: usize) -> Result<MecClass, OracleError> {
    check_mag(m)?;
    let edges = check_cap(m, cap)?;
    let mcps = minimal_collider_paths(m);
    let found = search(
        m,
        &edges,
        |_, _, _, _| true,
        |cur, x, y| triples_agree(cur, m, x, y),
        |cur| is_maximal(cur) && minimal_collider_paths(cur) == mcps,
    );
    Ok(MecClass::from_unsorted(found, format!("mec of\n{}", render_pmg(m))))
}

/// All MAGs represented by `g`: same skeleton, same minimal collider paths and
/// every invariant mark of `g` present.
pub fn represented_class(g: &Pmg, cap: usize) -> Result<MecClass, OracleError> {
    let edges = check_cap(g, cap)?;
    let mcps = minimal_collider_paths(g);
    let fits = |m: Mark, want: Mark| !want.is_invariant() || m == want;
    let found = search(
        g,
        &edges,
        |x, y, mx, my| {
            let (gx, gy) = g.edge(x, y).expect("skeleton edge");
            fits(mx, gx) && fits(my, gy)
        },
        |_, _, _| true,
        |cur| is_maximal(cur) && minimal_collider_paths(cur) == mcps,
    );
    Ok(MecClass::from_unsorted(
        found,
        format!("represented by\n{}", render_pmg(g)),
    ))
}

/// The canonically first MAG represented by `g` in which the edge `x - y`
/// has marks `(mx, my)`. `cap` bounds the edges carrying a circle.
pub fn represented_with(
    g: &Pmg,
    x: usize,
    y: usize,
    mx: Mark,
    my: Mark,
    cap: usize,
) -> Result<Option<Pmg>, OracleError> {
    let edges: Vec<(usize, usize)> = g.edges().into_iter().map(|(a, b, _, _)| (a, b)).collect();
    let variant = g
        .edges()
        .iter()
        .filter(|e| e.2 == Mark::Circle || e.3 == Mark::Circle)
        .count();
    if variant > cap {
        return Err(OracleError::CapExceeded {
            edges: variant,
            cap,
        });
    }
    let mcps = minimal_collider_paths(g);
    let fits = |m: Mark, want: Mark| !want.is_invariant() || m == want;
    let (lo, hi, mlo, mhi) = if x < y { (x, y, mx, my) } else { (y, x, my, mx) };
    let mut found = search(
        g,
        &edges,
        |a, b, ma, mb| {
            if (a, b) == (lo, hi) {
                return ma == mlo && mb == mhi;
            }
            let (ga, gb) = g.edge(a, b).expect("skeleton edge");
            fits(ma, ga) && fits(mb, gb)
        },
        |_, _, _| true,
        |cur| is_maximal(cur) && minimal_collider_paths(cur) == mcps,
    );
    sort_canonical(&mut found);
    Ok(found.into_iter().next())
}

/// Keeps the MAGs in which every piece holds.
pub fn restrict_mec(class: &MecClass, k: &[Piece]) -> Result<MecClass, OracleError> {
    let graphs: Vec<Pmg> = class
        .graphs
        .iter()
        .filter(|m| k.iter().all(|p| p.holds_in(m)))
        .cloned()
        .collect();
    if graphs.is_empty() {
        return Err(OracleError::InconsistentKnowledge);
    }
    Ok(MecClass {
        graphs,
        source: format!("{} restricted by {} pieces", class.source, k.len()),
    })
}

/// A mark is kept where all graphs agree and becomes a circle otherwise.
pub fn essential_by_intersection(class: &MecClass) -> Result<Pmg, OracleError> {
    let (first, rest) = class.graphs.split_first().ok_or(OracleError::EmptyClass)?;
    let mut out = first.clone();
    for (x, y, _, _) in first.edges() {
        for (a, b) in [(x, y), (y, x)] {
            let m = first.mark(a, b);
            if rest.iter().any(|g| g.mark(a, b) != m) {
                out.force_mark(a, b, Mark::Circle);
            }
        }
    }
    Ok(out)
}

/// Discriminated colliders of any class member that are not colliders in
/// some other member, as `(member index, path)`.
pub fn discriminated_collider_violations(class: &MecClass) -> Vec<(usize, Vec<usize>)> {
    let mut out = Vec::new();
    for (i, m) in class.graphs.iter().enumerate() {
        for (p, qk) in crate::paths::discriminated_colliders(m) {
            let k = p.len();
            let (q, b) = (p[k - 3], p[k - 1]);
            debug_assert_eq!(p[k - 2], qk);
            if class.graphs.iter().any(|o| !is_collider(o, q, qk, b)) {
                out.push((i, p));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::parse_knowledge;
    use crate::pmg::parse_pmg;

    const FIG1B: &str = "nodes: A B C D\nB --> A\nA --> C\nB --> C\nC --> D\nA --> D\n";

    #[test]
    fn single_edge_has_three_mags() {
        let g = parse_pmg("nodes: A B\nA o-o B").unwrap();
        assert_eq!(enumerate_mags(&g, DEFAULT_CAP).unwrap().len(), 3);
    }

    #[test]
    fn generators_agree_on_path_and_cycle() {
        for text in [
            "nodes: A B C D\nA o-o B\nB o-o C\nC o-o D",
            "nodes: A B C D\nA o-o B\nB o-o C\nC o-o D\nD o-o A",
            "nodes: A B C D\nA o-o B\nA o-o C\nA o-o D\nB o-o C\nC o-o D",
        ] {
            let g = parse_pmg(text).unwrap();
            let a = enumerate_mags(&g, DEFAULT_CAP).unwrap();
            let b = enumerate_mags_recursive(&g, DEFAULT_CAP).unwrap();
            assert_eq!(a, b, "{text}");
        }
    }

    #[test]
    fn cap_is_a_hard_error() {
        let g = parse_pmg("nodes: A B C\nA o-o B\nB o-o C").unwrap();
        assert_eq!(
            enumerate_mags(&g, 1).unwrap_err(),
            OracleError::CapExceeded { edges: 2, cap: 1 }
        );
    }

    #[test]
    fn fig1_class_sizes() {
        let m = parse_pmg(FIG1B).unwrap();
        let class = mec(&m, DEFAULT_CAP).unwrap();
        assert_eq!(class.len(), 35);
        let k = parse_knowledge(&m, "B *-> C").unwrap();
        let r = restrict_mec(&class, &k).unwrap();
        assert_eq!(r.len(), 13);
        let all = enumerate_mags(&m, DEFAULT_CAP).unwrap();
        let filtered: Vec<Pmg> = all
            .into_iter()
            .filter(|g| equivalent_by_mcps(g, &m))
            .collect();
        assert_eq!(filtered, class.graphs);
    }

    #[test]
    fn contradictory_knowledge() {
        let m = parse_pmg(FIG1B).unwrap();
        let class = mec(&m, DEFAULT_CAP).unwrap();
        let k = parse_knowledge(&m, "A --> B\nA <-- B").unwrap();
        assert_eq!(
            restrict_mec(&class, &k).unwrap_err(),
            OracleError::InconsistentKnowledge
        );
    }

    #[test]
    fn equivalence_small_cases() {
        let chain = parse_pmg("nodes: A B C\nA --> B\nB --> C").unwrap();
        let coll = parse_pmg("nodes: A B C\nA --> B\nC --> B").unwrap();
        assert!(markov_equivalent(&chain, &chain).unwrap());
        assert!(!markov_equivalent(&chain, &coll).unwrap());
    }

    #[test]
    fn represented_class_of_essential_graph_is_mec() {
        let m = parse_pmg(FIG1B).unwrap();
        let g = crate::algorithms::mag_to_essential(&m).unwrap();
        assert_eq!(
            represented_class(&g, DEFAULT_CAP).unwrap().graphs,
            mec(&m, DEFAULT_CAP).unwrap().graphs
        );
    }

    #[test]
    fn json_shape() {
        let m = parse_pmg("nodes: A B\nA --> B").unwrap();
        let v = mec(&m, DEFAULT_CAP).unwrap().to_json(true);
        assert_eq!(v["size"], 3);
        assert_eq!(v["graphs"].as_array().unwrap().len(), 3);
    }
}
