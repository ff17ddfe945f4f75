// SPDX-License-Identifier: Apache-2.0
//! Expert knowledge pieces and the knowledge file format.
//!
//! A piece is one of `A --> B`, `A <-- B`, `A *-> B` (arrowhead at `B`) and
//! `A <-* B` (arrowhead at `A`).

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Mark, Pmg};
use crate::pmg::marks_token;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Form {
    /// `x --> y`
    Directed,
    /// `x <-- y`
    ReverseDirected,
    /// `x *-> y`
    ArrowAtY,
    /// `x <-* y`
    ArrowAtX,
}

impl Form {
    pub const ALL: [Form; 4] = [
        Form::Directed,
        Form::ReverseDirected,
        Form::ArrowAtY,
        Form::ArrowAtX,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Form::Directed => "-->",
            Form::ReverseDirected => "<--",
            Form::ArrowAtY => "*->",
            Form::ArrowAtX => "<-*",
        }
    }

    pub fn from_token(tok: &str) -> Option<Form> {
        Form::ALL.into_iter().find(|f| f.token() == tok)
    }
}

/// A piece of knowledge over node indices of a host graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Piece {
    pub x: usize,
    pub y: usize,
    pub form: Form,
}

impl Piece {
    pub fn new(x: usize, y: usize, form: Form) -> Self {
        Piece { x, y, form }
    }

    /// The same assertion written with `x < y`.
    pub fn normalized(self) -> Piece {
        if self.x < self.y {
            return self;
        }
        let form = match self.form {
            Form::Directed => Form::ReverseDirected,
            Form::ReverseDirected => Form::Directed,
            Form::ArrowAtY => Form::ArrowAtX,
            Form::ArrowAtX => Form::ArrowAtY,
        };
        Piece::new(self.y, self.x, form)
    }

    /// `(a, b)` with the asserted arrowhead at `b`.
    pub fn head(self) -> (usize, usize) {
        match self.form {
            Form::Directed | Form::ArrowAtY => (self.x, self.y),
            Form::ReverseDirected | Form::ArrowAtX => (self.y, self.x),
        }
    }

    pub fn asserts_tail(self) -> bool {
        matches!(self.form, Form::Directed | Form::ReverseDirected)
    }

    /// Orientation commands `(a, b, mark at b)` that realise the piece.
    pub fn commands(self) -> Vec<(usize, usize, Mark)> {
        let (a, b) = self.head();
        let mut out = vec![(a, b, Mark::Arrow)];
        if self.asserts_tail() {
            out.insert(0, (b, a, Mark::Tail));
        }
        out
    }

    /// Whether the piece holds in a graph without circles (Def. of
    /// consistency for a single MAG).
    pub fn holds_in(self, m: &Pmg) -> bool {
        self.commands()
            .into_iter()
            .all(|(a, b, mk)| m.mark(a, b) == Some(mk))
    }

    pub fn display(self, g: &Pmg) -> String {
        format!("{} {} {}", g.name(self.x), self.form.token(), g.name(self.y))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KnowledgeError {
    #[error("line {line}: expected `<node> <token> <node>`")]
    Shape { line: usize },
    #[error("line {line}: unknown knowledge token `{token}`")]
    Token { line: usize, token: String },
    #[error("line {line}: unknown node `{node}`")]
    Node { line: usize, node: String },
    #[error("line {line}: a piece needs two distinct nodes")]
    SameNode { line: usize },
}

/// Parses a single piece such as `B *-> C`.
pub fn parse_piece(g: &Pmg, text: &str) -> Result<Piece, KnowledgeError> {
    parse_line(g, text, 1)
}

fn parse_line(g: &Pmg, line: &str, line_no: usize) -> Result<Piece, KnowledgeError> {
    let ws: Vec<&str> = line.split_whitespace().collect();
    let [x, tok, y] = ws[..] else {
        return Err(KnowledgeError::Shape { line: line_no });
    };
    let form = Form::from_token(tok).ok_or_else(|| KnowledgeError::Token {
        line: line_no,
        token: tok.to_string(),
    })?;
    let node = |s: &str| {
        g.index(s).ok_or_else(|| KnowledgeError::Node {
            line: line_no,
            node: s.to_string(),
        })
    };
    let (xi, yi) = (node(x)?, node(y)?);
    if xi == yi {
        return Err(KnowledgeError::SameNode { line: line_no });
    }
    Ok(Piece::new(xi, yi, form))
}

/// Parses a knowledge file, one piece per line, `#` comments.
pub fn parse_knowledge(g: &Pmg, text: &str) -> Result<Vec<Piece>, KnowledgeError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_line(g, line, i + 1)?);
    }
    Ok(out)
}

pub fn render_knowledge(g: &Pmg, k: &[Piece]) -> String {
    k.iter().map(|p| p.display(g) + "\n").collect()
}

/// Why a piece is not admissible.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Inadmissible {
    #[error("no edge between {0} and {1}")]
    NoEdge(String, String),
    #[error("{piece} is not admissible: the graph has {existing}")]
    Marks { piece: String, existing: String },
}

/// Admissibility of a piece with respect to the current marks.
///
/// `A --> B` needs `A o-o B`, `A o-> B` or `A --> B`. `A *-> B` needs any
/// mark other than a tail at `B`. The reverse forms are the mirror images.
pub fn check_admissible(g: &Pmg, p: Piece) -> Result<(), Inadmissible> {
    let Some((mx, my)) = g.edge(p.x, p.y) else {
        return Err(Inadmissible::NoEdge(
            g.name(p.x).to_string(),
            g.name(p.y).to_string(),
        ));
    };
    let (a, _) = p.head();
    let (ma, mb) = if a == p.x { (mx, my) } else { (my, mx) };
    let ok = if p.asserts_tail() {
        matches!(
            (ma, mb),
            (Mark::Circle, Mark::Circle) | (Mark::Circle, Mark::Arrow) | (Mark::Tail, Mark::Arrow)
        )
    } else {
        mb != Mark::Tail
    };
    if ok {
        Ok(())
    } else {
        Err(Inadmissible::Marks {
            piece: p.display(g),
            existing: format!("{} {} {}", g.name(p.x), marks_token(mx, my), g.name(p.y)),
        })
    }
}

pub fn is_admissible(g: &Pmg, p: Piece) -> bool {
    check_admissible(g, p).is_ok()
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}
