// SPDX-License-Identifier: Apache-2.0
//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use magmec::knowledge::parse_knowledge;
use magmec::{parse_pmg, Piece, Pmg};

pub fn fixture_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(rel)
}

pub fn text(rel: &str) -> String {
    std::fs::read_to_string(fixture_path(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn graph(rel: &str) -> Pmg {
    parse_pmg(&text(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn knowledge(g: &Pmg, rel: &str) -> Vec<Piece> {
    parse_knowledge(g, &text(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn idx(g: &Pmg, names: &[&str]) -> Vec<usize> {
    names.iter().map(|n| g.index(n).expect("node")).collect()
}

/// A random restricted graph: essential graph `g` of a projected random
/// DAG and `gp` with part of the circle marks revealed from a member MAG.
pub struct Restricted {
    pub mag: Pmg,
    pub k: Vec<Piece>,
    pub g: Pmg,
    pub gp: Pmg,
}

pub fn random_restricted(seed: u64, n_max: usize, edge_cap: usize) -> Option<Restricted> {
    use magmec::algorithms::{add_bg_knowledge, dag_to_mag, mag_to_essential};
    use magmec::simulation::{random_dag, reveal_knowledge, select_latents};
    use rand::{Rng, SeedableRng};

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=n_max + 1);
    let p = rng.gen_range(0.2..0.8);
    let d = random_dag(n, p, &mut rng);
    let (latents, _) = select_latents(&d, 0.2, &mut rng);
    let mag = dag_to_mag(&d, &latents).ok()?;
    if mag.n() > n_max || mag.edge_count() == 0 || mag.edge_count() > edge_cap {
        return None;
    }
    let g = mag_to_essential(&mag).ok()?;
    let pct = [0, 10, 30, 50][(seed % 4) as usize];
    let k = reveal_knowledge(&g, &mag, pct, &mut rng);
    let gp = add_bg_knowledge(&g, &k)
        .unwrap_or_else(|e| panic!("knowledge read from a member failed: {e}"))
        .graph;
    Some(Restricted { mag, k, g, gp })
}

/// Chordal skeleton and no minimal collider paths.
pub fn is_eligible(gp: &Pmg) -> bool {
    magmec::chordal::is_chordal(gp) && magmec::paths::minimal_collider_paths(gp).is_empty()
}

/// A random MAG from a projected random DAG.
pub fn random_mag(seed: u64, n_max: usize, edge_cap: usize) -> Option<Pmg> {
    use magmec::algorithms::dag_to_mag;
    use magmec::simulation::{random_dag, select_latents};
    use rand::{Rng, SeedableRng};

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let n = rng.gen_range(2..=n_max + 1);
    let p = rng.gen_range(0.15..0.85);
    let d = random_dag(n, p, &mut rng);
    let (latents, _) = select_latents(&d, 0.25, &mut rng);
    let mag = dag_to_mag(&d, &latents).ok()?;
    (mag.n() <= n_max && mag.edge_count() <= edge_cap).then_some(mag)
}
