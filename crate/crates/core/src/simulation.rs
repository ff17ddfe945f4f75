// SPDX-License-Identifier: Apache-2.0
//! Simulation harness: random DAGs, latent selection, projection, revealed
//! knowledge and the completeness check, with per-stage timings.
//!
//! Every trial owns a ChaCha8 stream seeded from `(master seed, trial
//! index)`, so records do not depend on scheduling.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algorithms::{add_bg_knowledge, dag_to_mag, mag_to_essential, verify_completeness};
use crate::graph::{Mark, Pmg};
use crate::knowledge::{Form, Piece};

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("trial {seed}: {stage} failed: {detail}")]
    Stage {
        seed: u64,
        stage: &'static str,
        detail: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

/// Random DAG over `X1..Xn`: a random topological order, then every forward
/// pair becomes an edge with probability `p`.
pub fn random_dag<R: Rng>(n: usize, p: f64, rng: &mut R) -> Pmg {
    let names: Vec<String> = (1..=n).map(|i| format!("X{i}")).collect();
    let mut d = Pmg::new(&names).expect("distinct names");
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                d.add_edge(order[i], order[j], Mark::Tail, Mark::Arrow)
                    .expect("each pair once");
            }
        }
    }
    d
}

/// `random_dag` with its own stream.
pub fn random_dag_seeded(n: usize, p: f64, seed: u64) -> Pmg {
    random_dag(n, p, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Picks `ceil(fraction * n)` latent nodes among the parentless nodes of `d`.
/// Returns the chosen nodes, sorted, and whether there were too few sources.
pub fn select_latents<R: Rng>(d: &Pmg, fraction: f64, rng: &mut R) -> (Vec<usize>, bool) {
    let want = (fraction * d.n() as f64).ceil() as usize;
    let sources: Vec<usize> = (0..d.n()).filter(|&v| d.parents(v).is_empty()).collect();
    let shortfall = sources.len() < want;
    let mut chosen: Vec<usize> = sources
        .choose_multiple(rng, want.min(sources.len()))
        .copied()
        .collect();
    chosen.sort_unstable();
    (chosen, shortfall)
}

/// Reveals `percent` of the circle marks of `g`, read from `m`. A revealed
/// tail also reveals the arrowhead on the same edge.
pub fn reveal_knowledge<R: Rng>(g: &Pmg, m: &Pmg, percent: u32, rng: &mut R) -> Vec<Piece> {
    let mut circles = Vec::new();
    for (x, y, a, b) in g.edges() {
        if a == Mark::Circle {
            circles.push((y, x));
        }
        if b == Mark::Circle {
            circles.push((x, y));
        }
    }
    let k = (circles.len() * percent as usize + 50) / 100;
    let mut picked: Vec<(usize, usize)> = circles.choose_multiple(rng, k).copied().collect();
    picked.sort_unstable();
    // per edge (lo, hi): revealed ends
    let mut per_edge: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (x, y) in picked {
        per_edge.entry((x.min(y), x.max(y))).or_default().push(y);
    }
    let mut out = Vec::new();
    for ((lo, hi), ends) in per_edge {
        let tail_end = ends.iter().copied().find(|&e| {
            let other = if e == lo { hi } else { lo };
            m.tail_at(other, e)
        });
        if let Some(t) = tail_end {
            let other = if t == lo { hi } else { lo };
            out.push(Piece::new(t, other, Form::Directed));
        } else {
            for e in ends {
                let other = if e == lo { hi } else { lo };
                out.push(Piece::new(other, e, Form::ArrowAtY));
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrialParams {
    pub seed: u64,
    pub n: usize,
    pub p: f64,
    pub reveal_percent: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StageTimes {
    pub dag_to_mag_ms: f64,
    pub mag_to_essential_ms: f64,
    pub add_bg_ms: f64,
    pub verify_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrialRecord {
    pub seed: u64,
    pub n: usize,
    pub p: f64,
    pub reveal_percent: u32,
    pub latents: Vec<String>,
    pub latent_shortfall: bool,
    pub dag_edges: usize,
    /// `o->` edges in the essential graph.
    pub circ_to_arrow: usize,
    /// Circle marks in the essential graph.
    pub circle_marks: usize,
    pub knowledge: Vec<String>,
    pub verify_verdict: bool,
    pub verify_failure: Option<String>,
    pub times: StageTimes,
}

impl TrialRecord {
    /// The record without wall-clock data.
    pub fn without_times(&self) -> TrialRecord {
        TrialRecord {
            times: StageTimes::default(),
            ..self.clone()
        }
    }

    pub fn runtime_ms(&self) -> f64 {
        let t = &self.times;
        t.dag_to_mag_ms + t.mag_to_essential_ms + t.add_bg_ms + t.verify_ms
    }
}

pub const LATENT_FRACTION: f64 = 0.1;

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1000.0
}

/// One pass through the whole pipeline.
pub fn run_trial(params: TrialParams) -> Result<TrialRecord, SimulationError> {
    let TrialParams {
        seed,
        n,
        p,
        reveal_percent,
    } = params;
    if n < 2 || !(p > 0.0 && p < 1.0) || reveal_percent > 100 {
        return Err(SimulationError::Params(format!(
            "n={n}, p={p}, reveal={reveal_percent}"
        )));
    }
    let stage = |stage: &'static str, detail: String| SimulationError::Stage {
        seed,
        stage,
        detail,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = random_dag(n, p, &mut rng);
    let (latents, latent_shortfall) = select_latents(&d, LATENT_FRACTION, &mut rng);
    let mut times = StageTimes::default();

    let t = Instant::now();
    let m = dag_to_mag(&d, &latents).map_err(|e| stage("dagToMag", e.to_string()))?;
    times.dag_to_mag_ms = ms_since(t);

    let t = Instant::now();
    let g = mag_to_essential(&m).map_err(|e| stage("magToEssential", e.to_string()))?;
    times.mag_to_essential_ms = ms_since(t);

    let k = reveal_knowledge(&g, &m, reveal_percent, &mut rng);
    if let Some(bad) = k.iter().find(|piece| !piece.holds_in(&m)) {
        return Err(stage("revealKnowledge", format!("{} does not hold", bad.display(&m))));
    }

    let t = Instant::now();
    let gp = add_bg_knowledge(&g, &k)
        .map_err(|e| stage("addBgKnowledge", e.to_string()))?
        .graph;
    times.add_bg_ms = ms_since(t);

    let t = Instant::now();
    let report = verify_completeness(&g, &k, &gp);
    times.verify_ms = ms_since(t);

    let mut circ_to_arrow = 0;
    let mut circle_marks = 0;
    for (_, _, a, b) in g.edges() {
        circle_marks += usize::from(a == Mark::Circle) + usize::from(b == Mark::Circle);
        if matches!((a, b), (Mark::Circle, Mark::Arrow) | (Mark::Arrow, Mark::Circle)) {
            circ_to_arrow += 1;
        }
    }
    Ok(TrialRecord {
        seed,
        n,
        p,
        reveal_percent,
        latents: latents.iter().map(|&v| d.name(v).to_string()).collect(),
        latent_shortfall,
        dag_edges: d.edge_count(),
        circ_to_arrow,
        circle_marks,
        knowledge: k.iter().map(|piece| piece.display(&g)).collect(),
        verify_verdict: report.verdict,
        verify_failure: report.failure,
        times,
    })
}

/// Seed of trial `index` under `master`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    // splitmix64 step
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub ns: Vec<usize>,
    pub ps: Vec<f64>,
    pub reveals: Vec<u32>,
    /// Trials per cell.
    pub trials: usize,
    pub seed: u64,
}

impl Grid {
    /// Trial parameters in a fixed order.
    pub fn params(&self) -> Vec<TrialParams> {
        let mut out = Vec::new();
        for &n in &self.ns {
            for &p in &self.ps {
                for &reveal_percent in &self.reveals {
                    for _ in 0..self.trials {
                        let seed = trial_seed(self.seed, out.len() as u64);
                        out.push(TrialParams {
                            seed,
                            n,
                            p,
                            reveal_percent,
                        });
                    }
                }
            }
        }
        out
    }
}

/// Runs every trial of the grid in parallel. Records come back in grid
/// order.
pub fn run_grid(grid: &Grid) -> Result<Vec<TrialRecord>, SimulationError> {
    grid.params().into_par_iter().map(run_trial).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SummaryRow {
    pub n: usize,
    pub p: f64,
    pub reveal_percent: u32,
    pub trials: usize,
    pub mean_circ2_arrow: f64,
    pub median_circ2_arrow: f64,
    pub mean_circle_marks: f64,
    pub verify_true_rate: f64,
    pub mean_runtime_ms: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        (v[k / 2 - 1] + v[k / 2]) / 2.0
    }
}

/// One row per `(n, p, reveal)` cell, sorted by those keys.
pub fn summarize(records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut cells: BTreeMap<(usize, u64, u32), Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        cells
            .entry((r.n, r.p.to_bits(), r.reveal_percent))
            .or_default()
            .push(r);
    }
    let mut rows: Vec<SummaryRow> = cells
        .into_values()
        .map(|rs| {
            let f = |get: fn(&TrialRecord) -> f64| rs.iter().map(|r| get(r)).collect::<Vec<_>>();
            let c2a = f(|r| r.circ_to_arrow as f64);
            SummaryRow {
                n: rs[0].n,
                p: rs[0].p,
                reveal_percent: rs[0].reveal_percent,
                trials: rs.len(),
                mean_circ2_arrow: mean(&c2a),
                median_circ2_arrow: median(&c2a),
                mean_circle_marks: mean(&f(|r| r.circle_marks as f64)),
                verify_true_rate: mean(&f(|r| f64::from(u8::from(r.verify_verdict)))),
                mean_runtime_ms: mean(&f(TrialRecord::runtime_ms)),
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        a.n.cmp(&b.n)
            .then(a.p.total_cmp(&b.p))
            .then(a.reveal_percent.cmp(&b.reveal_percent))
    });
    rows
}

pub const SUMMARY_HEADER: &str =
    "n,p,revealPercent,meanCirc2Arrow,medianCirc2Arrow,meanCircleMarks,verifyTrueRate,meanRuntimeMs";

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:.4},{},{:.4},{:.4},{:.4}\n",
            r.n,
            r.p,
            r.reveal_percent,
            r.mean_circ2_arrow,
            r.median_circ2_arrow,
            r.mean_circle_marks,
            r.verify_true_rate,
            r.mean_runtime_ms
        ));
    }
    out
}

/// Appends records to a JSON-lines file.
pub fn append_records(path: &Path, records: &[TrialRecord]) -> Result<(), SimulationError> {
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    for r in records {
        let line = serde_json::to_string(r).expect("plain record");
        writeln!(f, "{line}")?;
    }
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<TrialRecord>, SimulationError> {
    let f = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|source| SimulationError::Json {
                line: i + 1,
                source,
            })?,
        );
    }
    Ok(out)
}

/// Runs the grid, appends to `results.jsonl` under `dir` and rewrites
/// `summary.csv` from the whole file.
pub fn simulate_to_dir(grid: &Grid, dir: &Path) -> Result<Vec<SummaryRow>, SimulationError> {
    std::fs::create_dir_all(dir)?;
    let records = run_grid(grid)?;
    let results = dir.join("results.jsonl");
    append_records(&results, &records)?;
    let rows = summarize(&read_records(&results)?);
    std::fs::write(dir.join("summary.csv"), summary_csv(&rows))?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_limit_is_complete() {
        let d = random_dag_seeded(6, 0.999_999, 3);
        assert_eq!(d.edge_count(), 15);
        assert!(d.is_dag());
    }

    #[test]
    fn dag_is_deterministic() {
        assert_eq!(random_dag_seeded(10, 0.05, 1), random_dag_seeded(10, 0.05, 1));
    }

    #[test]
    fn zero_percent_reveals_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let d = random_dag(8, 0.4, &mut rng);
        let m = dag_to_mag(&d, &[]).unwrap();
        let g = mag_to_essential(&m).unwrap();
        assert!(reveal_knowledge(&g, &m, 0, &mut rng).is_empty());
    }

    #[test]
    fn latents_are_sources() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let d = random_dag(10, 0.3, &mut rng);
            let (l, short) = select_latents(&d, 0.1, &mut rng);
            assert!(l.iter().all(|&v| d.parents(v).is_empty()));
            assert!(short || l.len() == 1);
        }
    }

    #[test]
    fn trial_is_reproducible() {
        let p = TrialParams {
            seed: 42,
            n: 9,
            p: 0.25,
            reveal_percent: 50,
        };
        let a = run_trial(p).unwrap();
        let b = run_trial(p).unwrap();
        assert_eq!(a.without_times(), b.without_times());
    }

    #[test]
    fn empty_summary() {
        assert!(summarize(&[]).is_empty());
        assert_eq!(summary_csv(&[]), format!("{SUMMARY_HEADER}\n"));
    }

    #[test]
    fn records_round_trip_through_jsonl() {
        let dir = std::env::temp_dir().join(format!("magmec-sim-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        let grid = Grid {
            ns: vec![6],
            ps: vec![0.3],
            reveals: vec![30],
            trials: 3,
            seed: 7,
        };
        let rows = simulate_to_dir(&grid, &dir).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].trials, 3);
        let back = read_records(&dir.join("results.jsonl")).unwrap();
        assert_eq!(back.len(), 3);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
