// SPDX-License-Identifier: Apache-2.0
//! Markov equivalence classes of maximal ancestral graphs restricted by
//! expert knowledge on edge marks.
//!
//! The crate covers graph representation and the `.pmg` format, path
//! machinery, the orientation rules with a closure engine, the main
//! algorithms (essential graph construction, adding knowledge and the
//! completeness check), a sampler for MAGs with a chosen edge orientation,
//! a brute-force oracle and a simulation harness.

pub mod algorithms;
pub mod chordal;
pub mod graph;
pub mod knowledge;
pub mod oracle;
pub mod paths;
pub mod pmg;
pub mod rules;
pub mod simulation;

pub use graph::{GraphError, Mark, Pmg};
pub use knowledge::{Form, Piece};
pub use pmg::{parse_pmg, render_pmg};
pub use rules::RuleId;
