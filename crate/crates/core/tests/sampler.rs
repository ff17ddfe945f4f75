// SPDX-License-Identifier: Apache-2.0
//! Sampler and join tree checks against the brute-force oracle.

mod common;

use common::{is_eligible, random_restricted};
use magmec::chordal::{
    apply_tree_orientations, build_join_tree, check_request, circle_components, orient_clique_to_mag,
    orient_tree, sample_mag, sample_mag_with, transform_tree, ChordalError, EdgeRequest, SampleMethod,
};
use magmec::oracle::{is_mag, represented_class};
use magmec::paths::minimal_collider_paths;
use magmec::rules::{is_closed, RuleId};
use magmec::{render_pmg, Mark, Pmg};

const CAP: usize = 12;

fn variant_edges(g: &Pmg) -> Vec<(usize, usize)> {
    g.edges()
        .into_iter()
        .filter(|&(_, _, a, b)| a == Mark::Circle || b == Mark::Circle)
        .map(|(x, y, _, _)| (x, y))
        .collect()
}

#[test]
fn samples_are_class_members_on_random_eligible_graphs() {
    let (mut instances, mut requests, mut constructed) = (0, 0, 0);
    for seed in 0..4000u64 {
        if instances >= 120 {
            break;
        }
        let Some(r) = random_restricted(seed, 7, CAP) else { continue };
        if !is_eligible(&r.gp) || variant_edges(&r.gp).is_empty() {
            continue;
        }
        instances += 1;
        let class = represented_class(&r.gp, CAP).unwrap();
        assert!(class.contains(&r.mag));
        for (x, y) in variant_edges(&r.gp) {
            for req in EdgeRequest::ALL {
                if check_request(&r.gp, x, y, req).is_err() {
                    continue;
                }
                requests += 1;
                let s = sample_mag_with(&r.gp, &r.g, x, y, req).unwrap_or_else(|e| {
                    panic!("{} {} {}: {e}\n{}", r.gp.name(x), req, r.gp.name(y), render_pmg(&r.gp))
                });
                assert!(class.contains(&s.mag), "{}", render_pmg(&s.mag));
                let (wa, wb) = req.marks();
                assert_eq!((s.mag.mark(y, x), s.mag.mark(x, y)), (Some(wa), Some(wb)));
                if s.method == SampleMethod::Construction {
                    constructed += 1;
                }
            }
        }
    }
    assert!(instances >= 100, "only {instances} eligible instances");
    // the bounded search is a fallback, not the main path
    assert!(constructed * 10 >= requests * 9, "{constructed} of {requests} constructed");
}

#[test]
fn every_variant_edge_is_realizable_on_small_eligible_graphs() {
    let mut checked = 0;
    for seed in 0..3000u64 {
        let Some(r) = random_restricted(seed, 6, CAP) else { continue };
        if !is_eligible(&r.gp) {
            continue;
        }
        let class = represented_class(&r.gp, CAP).unwrap();
        for (x, y, mx, my) in r.gp.edges() {
            let wanted: &[EdgeRequest] = match (mx, my) {
                (Mark::Circle, Mark::Circle) => &EdgeRequest::ALL,
                (Mark::Circle, Mark::Arrow) => &[EdgeRequest::Directed, EdgeRequest::Bidirected],
                (Mark::Arrow, Mark::Circle) => &[EdgeRequest::Reverse, EdgeRequest::Bidirected],
                _ => continue,
            };
            for &req in wanted {
                let (wa, wb) = req.marks();
                let members = class
                    .graphs
                    .iter()
                    .filter(|m| m.mark(y, x) == Some(wa) && m.mark(x, y) == Some(wb))
                    .count();
                assert!(members > 0, "{} {} {} not realizable\n{}", r.gp.name(x), req, r.gp.name(y), render_pmg(&r.gp));
                checked += 1;
            }
        }
    }
    assert!(checked > 500, "{checked}");
}

#[test]
fn no_such_mag_is_reported_not_guessed() {
    // B is a collider on A *-> B <-* C, so B --> A cannot hold.
    let g = magmec::parse_pmg("nodes: A B C\nA o-> B\nC o-> B").unwrap();
    assert!(matches!(
        sample_mag(&g, 1, 0, EdgeRequest::Directed),
        Err(ChordalError::InadmissibleRequest { .. })
    ));
    // With A *-> C --> B, B --> A would make C an ancestor of A, which
    // clashes with the arrowhead at C on A *-> C.
    let g = magmec::parse_pmg("nodes: A B C\nA o-o B\nB <-- C\nA o-> C").unwrap();
    let class = represented_class(&g, CAP).unwrap();
    for req in [EdgeRequest::Directed, EdgeRequest::Bidirected] {
        assert!(class.contains(&sample_mag(&g, 0, 1, req).unwrap().mag), "{req}");
    }
    assert!(matches!(
        sample_mag(&g, 0, 1, EdgeRequest::Reverse),
        Err(ChordalError::NoSuchMag(_))
    ));
}

#[test]
fn tree_orientation_is_ancestral_without_collider_paths() {
    let mut runs = 0;
    for seed in 0..3000u64 {
        if runs >= 100 {
            break;
        }
        let Some(r) = random_restricted(seed, 8, 16) else { continue };
        if !is_eligible(&r.gp) {
            continue;
        }
        for comp in circle_components(&r.g) {
            let h = r.gp.induced_subgraph(&comp);
            let t = build_join_tree(&h).unwrap();
            assert!(t.running_intersection());
            for c0 in 0..t.len() {
                let anchored = transform_tree(&h, &t, c0).unwrap();
                assert!(anchored.is_tree() && anchored.is_anchored(c0) && anchored.collider().is_none());
                let directed = orient_tree(&h, &t, c0).unwrap();
                assert_eq!(directed.undirected_count(), 0);
                let gpi = apply_tree_orientations(&h, &directed).unwrap();
                assert!(gpi.is_ancestral(), "{}", render_pmg(&gpi));
                assert!(minimal_collider_paths(&gpi).is_empty(), "{}", render_pmg(&gpi));
                let clique = &t.cliques[c0];
                for &a in clique {
                    for &b in clique {
                        if a < b {
                            assert_eq!(gpi.edge(a, b), h.edge(a, b));
                        }
                    }
                }
                runs += 1;
            }
        }
    }
    assert!(runs >= 100, "{runs}");
}

/// Every mark assignment on a triangle that is a sensible input: each
/// tail faces an arrowhead, the graph is ancestral and closed under the
/// ancestral-closure rules.
fn triangle_inputs() -> Vec<Pmg> {
    let marks = [Mark::Tail, Mark::Arrow, Mark::Circle];
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let mut out = Vec::new();
    for code in 0..729usize {
        let mut g = Pmg::new(&["A", "B", "C"]).unwrap();
        let mut c = code;
        let mut ok = true;
        for &(x, y) in &pairs {
            let (mx, my) = (marks[c % 3], marks[c / 3 % 3]);
            c /= 9;
            if (mx == Mark::Tail && my != Mark::Arrow) || (my == Mark::Tail && mx != Mark::Arrow) {
                ok = false;
            }
            g.add_edge(x, y, mx, my).unwrap();
        }
        if ok && g.is_ancestral() && is_closed(&g, &[RuleId::R2, RuleId::R8]) {
            out.push(g);
        }
    }
    out
}

#[test]
fn clique_orientation_on_every_triangle() {
    let mut tried = 0;
    for g in triangle_inputs() {
        let clique = [0, 1, 2];
        for (x, y) in variant_edges(&g) {
            for req in EdgeRequest::ALL {
                if check_request(&g, x, y, req).is_err() {
                    continue;
                }
                let m = orient_clique_to_mag(&g, &clique, x, y, req)
                    .unwrap_or_else(|e| panic!("{req} on\n{}: {e}", render_pmg(&g)));
                tried += 1;
                assert!(is_mag(&m), "{req} on\n{}gave\n{}", render_pmg(&g), render_pmg(&m));
                assert!(g.invariants_kept_in(&m));
                let (wa, wb) = req.marks();
                assert_eq!((m.mark(y, x), m.mark(x, y)), (Some(wa), Some(wb)));
            }
        }
    }
    assert!(tried > 50, "{tried}");
}
