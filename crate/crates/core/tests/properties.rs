// SPDX-License-Identifier: Apache-2.0
//! Property tests against the brute-force oracle.

mod common;

use common::{random_mag, random_restricted};
use magmec::algorithms::{add_bg_knowledge, mag_to_essential, verify_completeness};
use magmec::oracle::{
    discriminated_collider_violations, enumerate_mags, equivalent_by_mcps, equivalent_by_msep,
    essential_by_intersection, mec, msep_signature, represented_class, restrict_mec,
};
use magmec::paths::{
    almost_discriminating_paths, discriminated_colliders, discriminating_paths,
    is_almost_collider_path, minimal_collider_paths,
};
use magmec::rules::{close_in_order, fire, replay, RuleOptions, ALL_RULES, ESSENTIAL_RULES, KNOWLEDGE_RULES};
use magmec::{parse_pmg, render_pmg, Mark, Pmg, RuleId};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;

const CAP: usize = 12;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        max_global_rejects: 100_000,
        ..ProptestConfig::default()
    }
}

/// Naive ancestrality: no directed cycle and no `x <-> y` or `x <-* y` with
/// `x` an ancestor of `y`, by depth-first search from every node.
fn naive_ancestral(g: &Pmg) -> bool {
    let n = g.n();
    let reach = |s: usize| {
        let mut seen = vec![false; n];
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &w in g.neighbors(v) {
                if g.is_directed(v, w) && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    };
    for x in 0..n {
        let r = reach(x);
        if r[x] {
            return false;
        }
        for &y in g.neighbors(x) {
            // arrowhead at x on x - y while x reaches y
            if r[y] && g.arrow_at(y, x) {
                return false;
            }
        }
    }
    true
}

fn subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|v| b.contains(v))
}

fn is_contiguous_in(sub: &[usize], p: &[usize]) -> bool {
    let rev: Vec<usize> = p.iter().rev().copied().collect();
    [p.to_vec(), rev]
        .iter()
        .any(|q| q.windows(sub.len()).any(|w| w == sub))
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn essential_graph_is_class_intersection(seed in any::<u64>()) {
        let m = random_mag(seed, 7, CAP);
        prop_assume!(m.is_some());
        let m = m.unwrap();
        let g = mag_to_essential(&m).unwrap();
        let class = mec(&m, CAP).unwrap();
        prop_assert_eq!(&g, &essential_by_intersection(&class).unwrap(), "{}", render_pmg(&m));
    }

    #[test]
    fn render_then_parse_is_identity(seed in any::<u64>()) {
        let r = random_restricted(seed, 8, 20);
        prop_assume!(r.is_some());
        let gp = r.unwrap().gp;
        let text = render_pmg(&gp);
        let back = parse_pmg(&text).unwrap();
        prop_assert_eq!(&back, &gp);
        prop_assert_eq!(render_pmg(&back), text);
    }

    #[test]
    fn ancestrality_agrees_with_naive_search(seed in any::<u64>()) {
        let m = random_mag(seed, 7, 21);
        prop_assume!(m.as_ref().is_some_and(|m| m.edge_count() > 0));
        let mut m = m.unwrap();
        prop_assert!(m.is_ancestral() && naive_ancestral(&m));
        // flip one edge to break things half of the time
        let edges = m.edges();
        let (x, y, _, _) = edges[seed as usize % edges.len()];
        m.force_mark(x, y, Mark::Tail);
        m.force_mark(y, x, Mark::Arrow);
        prop_assert_eq!(m.is_ancestral(), naive_ancestral(&m), "{}", render_pmg(&m));
    }

    #[test]
    fn length_three_cycles_decide_ancestrality_after_closure(seed in any::<u64>()) {
        let r = random_restricted(seed, 8, 20);
        prop_assume!(r.is_some());
        let gp = r.unwrap().gp;
        prop_assert_eq!(gp.is_ancestral(), gp.find_len3_cycle().is_none());
        prop_assert!(gp.is_ancestral());
    }

    #[test]
    fn minimal_collider_path_interiors_are_explained(seed in any::<u64>()) {
        let m = random_mag(seed, 7, 21);
        prop_assume!(m.is_some());
        let m = m.unwrap();
        let disc = discriminated_colliders(&m);
        for p in minimal_collider_paths(&m) {
            for i in 1..p.len() - 1 {
                let unshielded = !m.adjacent(p[i - 1], p[i + 1]);
                let discriminated = disc.iter().any(|(dp, q)| *q == p[i] && is_contiguous_in(dp, &p));
                prop_assert!(unshielded || discriminated, "{:?} in\n{}", p, render_pmg(&m));
            }
            prop_assert!(is_almost_collider_path(&m, &p));
        }
        for (dp, q) in disc {
            let b = *dp.last().unwrap();
            prop_assert!(discriminating_paths(&m, q, b).contains(&dp));
            prop_assert!(almost_discriminating_paths(&m, q, b).contains(&dp));
        }
    }

    #[test]
    fn zhao_r4_is_contained_in_r4(seed in any::<u64>()) {
        let r = random_restricted(seed, 8, 20);
        prop_assume!(r.is_some());
        let r = r.unwrap();
        for h in [&r.g, &r.gp] {
            let r4: Vec<_> = fire(RuleId::R4, h).into_iter().map(|f| (f.x, f.y, f.mark)).collect();
            for f in fire(RuleId::ZhaoR4, h) {
                prop_assert!(r4.contains(&(f.x, f.y, f.mark)));
            }
        }
    }

    #[test]
    fn closure_is_order_independent(seed in any::<u64>()) {
        let r = random_restricted(seed, 8, 20);
        prop_assume!(r.is_some());
        let r = r.unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let opts = RuleOptions::default();

        // essential graph from skeleton plus collider arrowheads
        let mut start = r.mag.skeleton();
        for p in minimal_collider_paths(&r.mag) {
            for w in p.windows(3) {
                start.force_mark(w[0], w[1], Mark::Arrow);
                start.force_mark(w[2], w[1], Mark::Arrow);
            }
        }
        // knowledge added all at once
        let mut with_k = r.g.clone();
        for p in &r.k {
            for (x, y, mark) in p.commands() {
                with_k.force_mark(x, y, mark);
            }
        }
        for (input, rules) in [(start, ESSENTIAL_RULES), (with_k, KNOWLEDGE_RULES)] {
            let first = close_in_order(&input, rules, &opts).map(|o| o.0).ok();
            for _ in 0..10 {
                let mut order = rules.to_vec();
                order.shuffle(&mut rng);
                let other = close_in_order(&input, &order, &opts).map(|o| o.0).ok();
                prop_assert_eq!(&other, &first, "{:?}", order);
            }
        }
    }

    #[test]
    fn trace_is_monotone_and_replays(seed in any::<u64>()) {
        let r = random_restricted(seed, 8, 20);
        prop_assume!(r.is_some());
        let r = r.unwrap();
        let out = add_bg_knowledge(&r.g, &r.k).unwrap();
        let mut cur = r.g.clone();
        for t in &out.trace {
            prop_assert_eq!(cur.mark(t.x, t.y), Some(Mark::Circle));
            cur.force_mark(t.x, t.y, t.mark);
            prop_assert!(r.g.invariants_kept_in(&cur));
        }
        prop_assert_eq!(&replay(&r.g, &out.trace).unwrap(), &out.graph);
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn equivalence_deciders_agree(seed in any::<u64>()) {
        let m = random_mag(seed, 6, 9);
        prop_assume!(m.is_some());
        let all = enumerate_mags(&m.unwrap().skeleton(), CAP).unwrap();
        let keys: Vec<_> = all.iter().map(|g| (minimal_collider_paths(g), msep_signature(g))).collect();
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                prop_assert_eq!(
                    keys[i].0 == keys[j].0,
                    keys[i].1 == keys[j].1,
                    "\n{}\n{}", render_pmg(&all[i]), render_pmg(&all[j])
                );
            }
        }
        // spot check the public deciders on a few pairs
        for w in all.windows(2).take(20) {
            prop_assert_eq!(equivalent_by_mcps(&w[0], &w[1]), equivalent_by_msep(&w[0], &w[1]));
        }
    }
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn discriminated_colliders_are_class_invariant(seed in any::<u64>()) {
        let m = random_mag(seed, 6, CAP);
        prop_assume!(m.is_some());
        let class = mec(&m.unwrap(), CAP).unwrap();
        prop_assert!(discriminated_collider_violations(&class).is_empty());
    }

    #[test]
    fn rule_commands_hold_in_the_restricted_class(seed in any::<u64>()) {
        let r = random_restricted(seed, 6, CAP);
        prop_assume!(r.is_some());
        let r = r.unwrap();
        let class = mec(&r.mag, CAP).unwrap();
        let restricted = restrict_mec(&class, &r.k).unwrap();
        for m in &restricted.graphs {
            prop_assert!(r.k.iter().all(|p| p.holds_in(m)));
        }
        let out = add_bg_knowledge(&r.g, &r.k).unwrap();
        let holds = |x: usize, y: usize, mark: Mark| restricted.graphs.iter().all(|m| m.mark(x, y) == Some(mark));
        for t in &out.trace {
            prop_assert!(holds(t.x, t.y, t.mark), "{:?} {}", t.rule, render_pmg(&out.graph));
        }
        for &rule in ALL_RULES {
            for f in fire(rule, &out.graph) {
                prop_assert!(holds(f.x, f.y, f.mark), "{rule}");
            }
        }
        let meet = essential_by_intersection(&restricted).unwrap();
        prop_assert!(out.graph.invariants_kept_in(&meet));
    }

    #[test]
    fn verifier_agrees_with_the_oracle(seed in any::<u64>()) {
        let r = random_restricted(seed, 6, CAP);
        prop_assume!(r.is_some());
        let r = r.unwrap();
        let restricted = restrict_mec(&mec(&r.mag, CAP).unwrap(), &r.k).unwrap();
        let meet = essential_by_intersection(&restricted).unwrap();
        let rep = verify_completeness(&r.g, &r.k, &r.gp);
        prop_assert_eq!(rep.verdict, meet == r.gp, "{:?}\n{}\n{}", rep.failure, render_pmg(&r.gp), render_pmg(&meet));
    }

    #[test]
    fn ancestors_are_sandwiched(seed in any::<u64>()) {
        let r = random_restricted(seed, 6, CAP);
        prop_assume!(r.is_some());
        let gp = r.unwrap().gp;
        for m in &represented_class(&gp, CAP).unwrap().graphs {
            for x in 0..gp.n() {
                let am = m.ancestors(x);
                prop_assert!(subset(&gp.ancestors(x), &am));
                prop_assert!(subset(&am, &gp.possible_ancestors(x)));
            }
        }
    }
}
