// SPDX-License-Identifier: Apache-2.0
//! DAG to MAG projection, essential graph construction, adding knowledge,
//! the restricted-essential-graph check and the completeness verifier.

use serde::Serialize;
use thiserror::Error;

use crate::graph::{Mark, Pmg};
use crate::knowledge::{check_admissible, Form, Inadmissible, Piece};
use crate::paths::{discriminated_colliders, is_maximal, minimal_collider_paths, reachable_given};
use crate::rules::{
    close_under, fire, Conflict, RuleId, TraceEntry, ALL_RULES, ESSENTIAL_RULES, KNOWLEDGE_RULES,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgorithmError {
    #[error("input is not a DAG")]
    NotDag,
    #[error("latent set contains an unknown node index {0}")]
    BadLatent(usize),
    #[error("input is not a MAG: {0}")]
    InvalidMag(&'static str),
    #[error(transparent)]
    Conflict(#[from] Conflict),
}

/// Projects a DAG onto its observed nodes.
///
/// `A` and `B` are adjacent iff they are d-connected given the observed
/// ancestors of `{A, B}`. The mark at `A` is a tail iff `A` is an ancestor
/// of `B` in the DAG.
pub fn dag_to_mag(d: &Pmg, latents: &[usize]) -> Result<Pmg, AlgorithmError> {
    if !d.is_dag() {
        return Err(AlgorithmError::NotDag);
    }
    let mut latent = vec![false; d.n()];
    for &l in latents {
        *latent.get_mut(l).ok_or(AlgorithmError::BadLatent(l))? = true;
    }
    let observed: Vec<usize> = (0..d.n()).filter(|&v| !latent[v]).collect();
    let names: Vec<&str> = observed.iter().map(|&v| d.name(v)).collect();
    let mut m = Pmg::new(&names).expect("names come from a valid graph");
    let anc: Vec<Vec<bool>> = (0..d.n()).map(|v| d.ancestor_mask(&[v])).collect();
    for (i, &a) in observed.iter().enumerate() {
        for (j, &b) in observed.iter().enumerate().skip(i + 1) {
            let an_ab = d.ancestor_mask(&[a, b]);
            let z: Vec<usize> = observed
                .iter()
                .copied()
                .filter(|&v| v != a && v != b && an_ab[v])
                .collect();
            if !reachable_given(d, a, &z)[b] {
                continue;
            }
            let ma = if anc[b][a] { Mark::Tail } else { Mark::Arrow };
            let mb = if anc[a][b] { Mark::Tail } else { Mark::Arrow };
            m.add_edge(i, j, ma, mb).expect("fresh pair");
        }
    }
    Ok(m)
}

/// Essential ancestral graph of a MAG.
pub fn mag_to_essential(m: &Pmg) -> Result<Pmg, AlgorithmError> {
    if m.has_circles() {
        return Err(AlgorithmError::InvalidMag("has circle marks"));
    }
    if !m.is_ancestral() {
        return Err(AlgorithmError::InvalidMag("not ancestral"));
    }
    if !is_maximal(m) {
        return Err(AlgorithmError::InvalidMag("not maximal"));
    }
    let mut g = m.skeleton();
    for p in minimal_collider_paths(m) {
        for w in p.windows(3) {
            g.force_mark(w[0], w[1], Mark::Arrow);
            g.force_mark(w[2], w[1], Mark::Arrow);
        }
    }
    let (g, _) = close_under(&g, ESSENTIAL_RULES)?;
    Ok(g)
}

/// Whether a piece is admissible for `g`.
pub fn is_admissible(g: &Pmg, piece: Piece) -> bool {
    check_admissible(g, piece).is_ok()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AddBgError {
    #[error("piece {} is not admissible: {reason}", index + 1)]
    Inadmissible {
        index: usize,
        piece: Piece,
        reason: Inadmissible,
        state: Pmg,
    },
    #[error("piece {} led to a conflict: {conflict}", index + 1)]
    Conflict {
        index: usize,
        piece: Piece,
        conflict: Conflict,
    },
}

impl AddBgError {
    pub fn index(&self) -> usize {
        match self {
            AddBgError::Inadmissible { index, .. } | AddBgError::Conflict { index, .. } => *index,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AddBgOutput {
    pub graph: Pmg,
    pub trace: Vec<TraceEntry>,
}

/// Adds knowledge pieces in order, closing under the knowledge rule set
/// after each one.
pub fn add_bg_knowledge(g: &Pmg, k: &[Piece]) -> Result<AddBgOutput, AddBgError> {
    let mut cur = g.clone();
    let mut trace = Vec::new();
    for (index, &piece) in k.iter().enumerate() {
        if let Err(reason) = check_admissible(&cur, piece) {
            return Err(AddBgError::Inadmissible {
                index,
                piece,
                reason,
                state: cur,
            });
        }
        for (x, y, mark) in piece.commands() {
            // admissibility rules out conflicts here
            if cur.set_mark(x, y, mark).expect("admissible piece") {
                trace.push(TraceEntry {
                    rule: None,
                    witness: vec![piece.x, piece.y],
                    x,
                    y,
                    mark,
                });
            }
        }
        match close_under(&cur, KNOWLEDGE_RULES) {
            Ok((next, t)) => {
                cur = next;
                trace.extend(t);
            }
            Err(conflict) => {
                return Err(AddBgError::Conflict {
                    index,
                    piece,
                    conflict,
                })
            }
        }
    }
    Ok(AddBgOutput { graph: cur, trace })
}

/// Unshielded colliders of `g2` that are not unshielded colliders of `g`.
pub fn new_unshielded_colliders(g: &Pmg, g2: &Pmg) -> Vec<(usize, usize, usize)> {
    let old: std::collections::HashSet<_> = g.unshielded_colliders().into_iter().collect();
    g2.unshielded_colliders()
        .into_iter()
        .filter(|t| !old.contains(t))
        .collect()
}

/// Discriminated colliders of `g2` whose collider triple is not already a
/// collider in `g`.
pub fn new_discriminated_colliders(g: &Pmg, g2: &Pmg) -> Vec<(Vec<usize>, usize)> {
    discriminated_colliders(g2)
        .into_iter()
        .filter(|(p, qk)| {
            let q_prev = p[p.len() - 3];
            let b = p[p.len() - 1];
            !(g.arrow_at(q_prev, *qk) && g.arrow_at(b, *qk))
        })
        .collect()
}

/// Sufficient conditions for `g2` to be a restricted essential ancestral
/// graph relative to the essential graph `g`.
pub fn is_valid_refinement(g: &Pmg, g2: &Pmg) -> bool {
    refinement_failure(g, g2).is_none()
}

/// The first failing condition, if any.
pub fn refinement_failure(g: &Pmg, g2: &Pmg) -> Option<String> {
    if !g.same_skeleton(g2) {
        return Some("different skeleton".into());
    }
    if !g.invariants_kept_in(g2) {
        return Some("an invariant mark of the essential graph is missing".into());
    }
    if let Some([a, b, c]) = g2.find_len3_cycle() {
        return Some(format!(
            "cycle of length 3 through {}, {}, {}",
            g2.name(a),
            g2.name(b),
            g2.name(c)
        ));
    }
    if let Some(&(a, b, c)) = new_unshielded_colliders(g, g2).first() {
        return Some(format!(
            "new unshielded collider {} *-> {} <-* {}",
            g2.name(a),
            g2.name(b),
            g2.name(c)
        ));
    }
    if let Some((p, _)) = new_discriminated_colliders(g, g2).first() {
        return Some(format!(
            "new discriminated collider on {}",
            crate::paths::render_path(g2, p)
        ));
    }
    for (x, y, mx, my) in g.edges() {
        for (a, b, ma, mb) in [(x, y, mx, my), (y, x, my, mx)] {
            if ma == Mark::Circle && mb == Mark::Arrow && g2.circle_at(b, a) {
                return Some(format!("{} o-> {} is unresolved", g.name(a), g.name(b)));
            }
        }
    }
    for &r in ALL_RULES {
        if let Some(f) = crate::rules::fire(r, g2).first() {
            return Some(format!(
                "{r} still fires on edge {}-{}",
                g2.name(f.x),
                g2.name(f.y)
            ));
        }
    }
    None
}

// ---------------------------------------------------------------------------
// completeness verifier

/// Leaves explored per candidate while resolving the remaining `o->` edges.
pub const RESOLVE_BUDGET: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CandidateCheck {
    pub piece: String,
    pub ok: bool,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FinalCheck {
    pub ran: bool,
    pub len3_cycle: Option<Vec<String>>,
    pub new_unshielded: Vec<Vec<String>>,
    pub new_discriminated: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub verdict: bool,
    /// `o->` edges of the essential graph still `o->` in the input.
    pub open_edges: Vec<String>,
    pub edge_checks: Vec<CandidateCheck>,
    /// Invariant marks seen in every constructed graph but variant in the
    /// input, as `x y mark` meaning the mark at `y` on `x - y`.
    pub residue: Vec<String>,
    pub complement_checks: Vec<CandidateCheck>,
    pub final_check: FinalCheck,
    pub failure: Option<String>,
}

fn names(g: &Pmg, v: &[usize]) -> Vec<String> {
    v.iter().map(|&i| g.name(i).to_string()).collect()
}

/// `o->` edges `(a, b)` of `g` (circle at `a`, arrow at `b`) that are still
/// `o->` in `g2`.
fn open_partially_directed(g: &Pmg, g2: &Pmg) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (x, y, _, _) in g.edges() {
        for (a, b) in [(x, y), (y, x)] {
            if g.is_partially_directed(a, b) && g2.is_partially_directed(a, b) {
                out.push((a, b));
            }
        }
    }
    out
}

/// Invariant marks `(x, y, mark at y)` of `h` over the given edges.
fn invariants_over(h: &Pmg, edges: &[(usize, usize)]) -> Vec<(usize, usize, Mark)> {
    let mut out = Vec::new();
    for &(x, y) in edges {
        for (a, b) in [(x, y), (y, x)] {
            if let Some(m) = h.mark(a, b) {
                if m.is_invariant() {
                    out.push((a, b, m));
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// Builds a graph containing `piece` and every invariant mark of `gp`, with
/// every open `o->` edge of `g` resolved, that passes the restricted
/// essential graph check. Resolution tries `-->` before `<->`.
pub fn construct_witness(g: &Pmg, gp: &Pmg, piece: Piece) -> Result<Pmg, String> {
    let start = add_bg_knowledge(gp, &[piece]).map_err(|e| e.to_string())?;
    let mut budget = RESOLVE_BUDGET;
    let mut last_failure = None;
    resolve(g, start.graph, &mut budget, &mut last_failure)
        .ok_or_else(|| last_failure.unwrap_or_else(|| "no resolution within budget".into()))
}

fn resolve(g: &Pmg, h: Pmg, budget: &mut usize, last: &mut Option<String>) -> Option<Pmg> {
    let open = open_partially_directed(g, &h);
    let Some(&(a, b)) = open.first() else {
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        return match refinement_failure(g, &h) {
            None => Some(h),
            Some(why) => {
                *last = Some(why);
                None
            }
        };
    };
    for piece in [
        Piece::new(a, b, Form::Directed),
        Piece::new(b, a, Form::ArrowAtY),
    ] {
        if *budget == 0 {
            return None;
        }
        match add_bg_knowledge(&h, &[piece]) {
            Ok(out) => {
                if let Some(done) = resolve(g, out.graph, budget, last) {
                    return Some(done);
                }
            }
            Err(e) => *last = Some(e.to_string()),
        }
    }
    None
}

/// Checks whether `gp = add_bg_knowledge(g, k)` is the restricted essential
/// ancestral graph. Only meaningful when `add_bg_knowledge` succeeded.
pub fn verify_completeness(g: &Pmg, k: &[Piece], gp: &Pmg) -> VerifyReport {
    let mut rep = VerifyReport::default();
    if let Some(p) = k.iter().find(|p| !p.holds_in(gp)) {
        rep.failure = Some(format!("{} is not reflected in the graph", p.display(g)));
        return rep;
    }
    if !g.same_skeleton(gp) || !g.invariants_kept_in(gp) {
        rep.failure = Some("graph does not refine the essential graph".into());
        return rep;
    }
    if let Some((x, y, _, _)) = gp.edges().into_iter().find(|&(_, _, mx, my)| {
        (mx == Mark::Tail && my != Mark::Arrow) || (my == Mark::Tail && mx != Mark::Arrow)
    }) {
        rep.failure = Some(format!(
            "edge {} - {} has a tail without an arrowhead",
            g.name(x),
            g.name(y)
        ));
        return rep;
    }
    if let Some(r) = KNOWLEDGE_RULES.iter().find(|&&r| !fire(r, gp).is_empty()) {
        rep.failure = Some(format!("{r} still orients marks in the graph"));
        return rep;
    }
    let open = open_partially_directed(g, gp);
    rep.open_edges = open
        .iter()
        .map(|&(a, b)| format!("{} o-> {}", g.name(a), g.name(b)))
        .collect();
    let circle_edges: Vec<(usize, usize)> = g
        .edges()
        .into_iter()
        .filter(|&(_, _, a, b)| a == Mark::Circle && b == Mark::Circle)
        .map(|(x, y, _, _)| (x, y))
        .collect();
    let inv_c = invariants_over(gp, &circle_edges);

    if !open.is_empty() {
        let mut common: Option<Vec<(usize, usize, Mark)>> = None;
        for &(a, b) in &open {
            for piece in [
                Piece::new(a, b, Form::Directed),
                Piece::new(b, a, Form::ArrowAtY),
            ] {
                let label = match piece.form {
                    Form::Directed => format!("{} --> {}", g.name(a), g.name(b)),
                    _ => format!("{} <-> {}", g.name(a), g.name(b)),
                };
                match construct_witness(g, gp, piece) {
                    Ok(h) => {
                        rep.edge_checks.push(CandidateCheck {
                            piece: label,
                            ok: true,
                            detail: None,
                        });
                        let inv = invariants_over(&h, &circle_edges);
                        common = Some(match common {
                            None => inv,
                            Some(c) => c.into_iter().filter(|t| inv.binary_search(t).is_ok()).collect(),
                        });
                    }
                    Err(why) => {
                        rep.edge_checks.push(CandidateCheck {
                            piece: label.clone(),
                            ok: false,
                            detail: Some(why),
                        });
                        rep.failure = Some(format!("no witness graph for {label}"));
                        return rep;
                    }
                }
            }
        }
        let residue: Vec<(usize, usize, Mark)> = common
            .unwrap_or_default()
            .into_iter()
            .filter(|t| inv_c.binary_search(t).is_err())
            .collect();
        rep.residue = residue
            .iter()
            .map(|&(x, y, m)| format!("{} {} {}", g.name(x), g.name(y), m))
            .collect();
        for &(x, y, m) in &residue {
            let piece = match m {
                Mark::Arrow => Piece::new(y, x, Form::Directed),
                _ => Piece::new(x, y, Form::ArrowAtY),
            };
            let label = piece.display(g);
            match construct_witness(g, gp, piece) {
                Ok(_) => rep.complement_checks.push(CandidateCheck {
                    piece: label,
                    ok: true,
                    detail: None,
                }),
                Err(why) => {
                    rep.complement_checks.push(CandidateCheck {
                        piece: label.clone(),
                        ok: false,
                        detail: Some(why),
                    });
                    rep.failure = Some(format!("complementary orientation {label} is not viable"));
                    return rep;
                }
            }
        }
    }

    let fc = &mut rep.final_check;
    fc.ran = true;
    fc.len3_cycle = gp.find_len3_cycle().map(|c| names(gp, &c));
    fc.new_unshielded = new_unshielded_colliders(g, gp)
        .into_iter()
        .map(|(a, b, c)| names(gp, &[a, b, c]))
        .collect();
    fc.new_discriminated = new_discriminated_colliders(g, gp)
        .into_iter()
        .map(|(p, _)| names(gp, &p))
        .collect();
    if fc.len3_cycle.is_some() || !fc.new_unshielded.is_empty() || !fc.new_discriminated.is_empty()
    {
        rep.failure = Some("final ancestral/collider check failed".into());
        return rep;
    }
    rep.verdict = true;
    rep
}

/// Rule ids emitted by traces, for reporting.
pub fn rules_in_trace(trace: &[TraceEntry]) -> Vec<RuleId> {
    let mut v: Vec<RuleId> = trace.iter().filter_map(|t| t.rule).collect();
    v.sort();
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::parse_knowledge;
    use crate::pmg::{parse_pmg, render_pmg};

    const FIG1A: &str = "nodes: A B C D L1 L2\nL1 --> A\nL1 --> B\nB --> A\nA --> C\nB --> C\nC --> D\nA --> L2\nL2 --> D\n";
    const FIG1C: &str = "nodes: A B C D\nA o-o B\nA o-o C\nA o-o D\nB o-o C\nC o-o D\n";

    #[test]
    fn single_edge_essential() {
        let m = parse_pmg("nodes: A B\nA --> B").unwrap();
        assert_eq!(render_pmg(&mag_to_essential(&m).unwrap()), "nodes: A B\nA o-o B\n");
    }

    #[test]
    fn projection_without_latents_is_identity() {
        let d = parse_pmg("nodes: A B C\nA --> B\nC --> B").unwrap();
        assert_eq!(dag_to_mag(&d, &[]).unwrap(), d);
    }

    #[test]
    fn projection_shape() {
        let d = parse_pmg(FIG1A).unwrap();
        let m = dag_to_mag(&d, &[4, 5]).unwrap();
        assert!(m.is_ancestral() && is_maximal(&m));
        assert_eq!(m.n(), 4);
    }

    #[test]
    fn add_bg_empty_is_identity() {
        let g = parse_pmg(FIG1C).unwrap();
        assert_eq!(add_bg_knowledge(&g, &[]).unwrap().graph, g);
    }

    #[test]
    fn add_bg_fails_on_inadmissible() {
        let g = parse_pmg(FIG1C).unwrap();
        let k = parse_knowledge(&g, "B *-> C\nC --> D\nD --> A").unwrap();
        let err = add_bg_knowledge(&g, &k).unwrap_err();
        assert_eq!(err.index(), 2);
    }
}
