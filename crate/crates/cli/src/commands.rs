// SPDX-License-Identifier: Apache-2.0
//! Subcommands of the `magmec` binary.
//!
//! Every command returns its stdout text and an exit status. Exit status 0
//! is success, 1 a negative verdict or a failed knowledge run, 2 a usage,
//! input or parse error.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use magmec::algorithms::{add_bg_knowledge, mag_to_essential, verify_completeness};
use magmec::chordal::{sample_mag, sample_mag_with, ChordalError, EdgeRequest};
use magmec::knowledge::parse_knowledge;
use magmec::oracle::{mec, represented_class, restrict_mec, MecClass, OracleError, DEFAULT_CAP};
use magmec::rules::trace_to_jsonl;
use magmec::simulation::{simulate_to_dir, summary_csv, Grid};
use magmec::{parse_pmg, render_pmg, Piece, Pmg};
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "magmec", version, about = "Restrict Markov equivalence classes of MAGs with edge-mark knowledge")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Essential ancestral graph of a MAG.
    Mag2eag { mag: PathBuf },
    /// Adds knowledge to an essential graph and prints the result.
    Addbg {
        eag: PathBuf,
        knowledge: PathBuf,
        /// Also write the rule trace as JSON lines to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Adds knowledge and checks that the result is the restricted
    /// essential graph. Prints TRUE or FALSE.
    Verify {
        eag: PathBuf,
        knowledge: PathBuf,
        /// Check this graph instead of the computed one.
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Counts or lists the MAGs of a class.
    Mec(MecArgs),
    /// A MAG of the class with one edge oriented as requested.
    SampleMag {
        eag: PathBuf,
        /// The edge, as `A,B`.
        #[arg(long)]
        edge: String,
        #[arg(long, value_enum)]
        mark: MarkArg,
        /// Unrestricted essential graph the input was derived from.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Runs the simulation grid and writes results.jsonl and summary.csv.
    Simulate(SimulateArgs),
    /// Starts the JSON session service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Sessions are loaded from and saved to this JSON file.
        #[arg(long)]
        snapshot: Option<PathBuf>,
        /// Largest skeleton, in edges, the class endpoints enumerate.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
}

#[derive(Debug, Args)]
pub struct MecArgs {
    #[arg(value_enum)]
    pub action: MecAction,
    /// A MAG, or a graph with circles standing for its represented class.
    pub graph: PathBuf,
    #[arg(long)]
    pub restrict: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    pub cap: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MecAction {
    Count,
    Enumerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MarkArg {
    Dir,
    Rev,
    Bidir,
}

impl From<MarkArg> for EdgeRequest {
    fn from(m: MarkArg) -> Self {
        match m {
            MarkArg::Dir => EdgeRequest::Directed,
            MarkArg::Rev => EdgeRequest::Reverse,
            MarkArg::Bidir => EdgeRequest::Bidirected,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Node counts, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [8, 10, 12])]
    pub n: Vec<usize>,
    /// Edge probabilities, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.1, 0.25])]
    pub p: Vec<f64>,
    /// Percentages of circle marks to reveal, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [10, 30, 50, 80])]
    pub reveal: Vec<u32>,
    /// Trials per grid cell.
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {detail}")]
    Parse { path: String, detail: String },
    #[error("{0}")]
    Usage(String),
    /// A negative outcome: failed knowledge run, empty class, no MAG.
    #[error("FAIL: {0}")]
    Fail(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Fail(_) => 1,
            _ => 2,
        }
    }
}

/// Text for stdout and the exit status.
#[derive(Debug, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub code: i32,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Output { stdout, code: 0 }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load_graph(path: &Path) -> Result<Pmg, CliError> {
    parse_pmg(&read(path)?).map_err(|e| CliError::Parse {
        path: path.display().to_string(),
        detail: e.to_string(),
    })
}

fn load_knowledge(g: &Pmg, path: &Path) -> Result<Vec<Piece>, CliError> {
    parse_knowledge(g, &read(path)?).map_err(|e| CliError::Parse {
        path: path.display().to_string(),
        detail: e.to_string(),
    })
}

fn oracle_error(e: OracleError) -> CliError {
    match e {
        OracleError::InconsistentKnowledge | OracleError::EmptyClass => CliError::Fail(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    }
}

/// Runs one parsed command, except `serve`.
pub fn run(cmd: Command) -> Result<Output, CliError> {
    match cmd {
        Command::Mag2eag { mag } => {
            let m = load_graph(&mag)?;
            let g = mag_to_essential(&m).map_err(|e| CliError::Usage(e.to_string()))?;
            Ok(Output::ok(render_pmg(&g)))
        }
        Command::Addbg { eag, knowledge, trace } => {
            let g = load_graph(&eag)?;
            let k = load_knowledge(&g, &knowledge)?;
            let out = add_bg_knowledge(&g, &k).map_err(|e| CliError::Fail(e.to_string()))?;
            if let Some(path) = trace {
                std::fs::write(&path, trace_to_jsonl(&g, &out.trace)).map_err(|source| CliError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
            }
            Ok(Output::ok(render_pmg(&out.graph)))
        }
        Command::Verify { eag, knowledge, graph, json } => {
            let g = load_graph(&eag)?;
            let k = load_knowledge(&g, &knowledge)?;
            let gp = match graph {
                Some(path) => load_graph(&path)?,
                None => add_bg_knowledge(&g, &k).map_err(|e| CliError::Fail(e.to_string()))?.graph,
            };
            if !g.same_skeleton(&gp) {
                return Err(CliError::Usage("the graphs have different skeletons".into()));
            }
            let rep = verify_completeness(&g, &k, &gp);
            let code = if rep.verdict { 0 } else { 1 };
            let stdout = if json {
                serde_json::to_string_pretty(&rep).expect("report serializes") + "\n"
            } else {
                let mut s = if rep.verdict { "TRUE\n" } else { "FALSE\n" }.to_string();
                if let Some(why) = &rep.failure {
                    s += &format!("# {why}\n");
                }
                s
            };
            Ok(Output { stdout, code })
        }
        Command::Mec(args) => {
            let g = load_graph(&args.graph)?;
            let class = class_of(&g, args.cap)?;
            let class = match &args.restrict {
                Some(path) => {
                    let k = load_knowledge(&g, path)?;
                    restrict_mec(&class, &k).map_err(oracle_error)?
                }
                None => class,
            };
            Ok(Output::ok(match args.action {
                MecAction::Count => format!("{}\n", class.len()),
                MecAction::Enumerate => class
                    .graphs
                    .iter()
                    .map(render_pmg)
                    .collect::<Vec<_>>()
                    .join("\n"),
            }))
        }
        Command::SampleMag { eag, edge, mark, reference } => {
            let g = load_graph(&eag)?;
            let (a, b) = parse_edge(&g, &edge)?;
            let req = EdgeRequest::from(mark);
            let sample = match reference {
                Some(path) => {
                    let r = load_graph(&path)?;
                    if !r.same_skeleton(&g) {
                        return Err(CliError::Usage("reference graph has a different skeleton".into()));
                    }
                    sample_mag_with(&g, &r, a, b, req)
                }
                None => sample_mag(&g, a, b, req),
            };
            match sample {
                Ok(s) => {
                    let method = serde_json::to_value(s.method).expect("enum serializes");
                    let head = format!("# method: {}\n", method.as_str().unwrap_or_default());
                    Ok(Output::ok(head + &render_pmg(&s.mag)))
                }
                Err(e @ (ChordalError::NoSuchMag(_) | ChordalError::InadmissibleRequest { .. })) => {
                    Err(CliError::Fail(e.to_string()))
                }
                Err(e) => Err(CliError::Usage(e.to_string())),
            }
        }
        Command::Simulate(args) => {
            if args.n.iter().any(|&n| n < 2) || args.p.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
                return Err(CliError::Usage("need n >= 2 and 0 < p < 1".into()));
            }
            let grid = Grid {
                ns: args.n,
                ps: args.p,
                reveals: args.reveal,
                trials: args.trials,
                seed: args.seed,
            };
            let rows = simulate_to_dir(&grid, &args.out).map_err(|e| CliError::Usage(e.to_string()))?;
            let all_true = rows.iter().all(|r| r.verify_true_rate == 1.0);
            Ok(Output {
                stdout: summary_csv(&rows),
                code: if all_true { 0 } else { 1 },
            })
        }
        Command::Serve { .. } => Err(CliError::Usage("serve is not a batch command".into())),
    }
}

/// The class a graph stands for: its Markov equivalence class for a MAG,
/// the represented class otherwise.
pub fn class_of(g: &Pmg, cap: usize) -> Result<MecClass, CliError> {
    if g.has_circles() {
        represented_class(g, cap).map_err(oracle_error)
    } else {
        mec(g, cap).map_err(oracle_error)
    }
}

fn parse_edge(g: &Pmg, edge: &str) -> Result<(usize, usize), CliError> {
    let parts: Vec<&str> = edge.split(',').map(str::trim).collect();
    let [x, y] = parts[..] else {
        return Err(CliError::Usage(format!("--edge expects A,B, got `{edge}`")));
    };
    let idx = |s: &str| g.index(s).ok_or_else(|| CliError::Usage(format!("unknown node `{s}`")));
    let (a, b) = (idx(x)?, idx(y)?);
    if !g.adjacent(a, b) {
        return Err(CliError::Usage(format!("{x} and {y} are not adjacent")));
    }
    Ok((a, b))
}
