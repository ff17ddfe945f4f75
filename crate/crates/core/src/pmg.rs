// SPDX-License-Identifier: Apache-2.0
//! The `.pmg` text format.
//!
//! ```text
//! # comment
//! nodes: A B C
//! A o-> B
//! C <-> B
//! ```
//!
//! The left character of an edge token is the mark at the left node and the
//! right character the mark at the right node.

use thiserror::Error;

use crate::graph::{GraphError, Mark, Pmg};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: {source}")]
    Graph {
        line: usize,
        #[source]
        source: GraphError,
    },
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// Marks `(at left, at right)` for one of the six edge tokens.
pub fn token_marks(tok: &str) -> Option<(Mark, Mark)> {
    use Mark::*;
    Some(match tok {
        "o-o" => (Circle, Circle),
        "o->" => (Circle, Arrow),
        "<-o" => (Arrow, Circle),
        "-->" => (Tail, Arrow),
        "<--" => (Arrow, Tail),
        "<->" => (Arrow, Arrow),
        _ => return None,
    })
}

/// Token for a mark pair. Pairs outside the six-token alphabet only occur in
/// transient engine states and are rendered as `--o`, `o--` or `---`.
pub fn marks_token(left: Mark, right: Mark) -> &'static str {
    use Mark::*;
    match (left, right) {
        (Circle, Circle) => "o-o",
        (Circle, Arrow) => "o->",
        (Arrow, Circle) => "<-o",
        (Tail, Arrow) => "-->",
        (Arrow, Tail) => "<--",
        (Arrow, Arrow) => "<->",
        (Tail, Circle) => "--o",
        (Circle, Tail) => "o--",
        (Tail, Tail) => "---",
    }
}

fn valid_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Splits a line into whitespace-separated words with their 1-based columns.
fn words(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

pub fn parse_pmg(text: &str) -> Result<Pmg, ParseError> {
    let mut graph: Option<Pmg> = None;
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.split('#').next().unwrap_or("");
        let ws = words(line);
        if ws.is_empty() {
            continue;
        }
        let Some(g) = graph.as_mut() else {
            let (col, first) = ws[0];
            let rest: Vec<(usize, &str)> = if first == "nodes:" {
                ws[1..].to_vec()
            } else if let Some(tail) = first.strip_prefix("nodes:") {
                // `nodes:A B` is tolerated
                let mut v = vec![(col + 6, tail)];
                v.extend_from_slice(&ws[1..]);
                v
            } else {
                return Err(syntax(line_no, col, "expected `nodes:` header"));
            };
            let mut names = Vec::new();
            for (c, w) in rest {
                if !valid_ident(w) {
                    return Err(syntax(line_no, c, format!("invalid node name `{w}`")));
                }
                names.push(w);
            }
            graph = Some(Pmg::new(&names).map_err(|source| ParseError::Graph {
                line: line_no,
                source,
            })?);
            continue;
        };
        if ws.len() != 3 {
            let col = ws.get(3).map_or(ws[0].0, |w| w.0);
            return Err(syntax(line_no, col, "expected `<node> <edge> <node>`"));
        }
        let (cx, x) = ws[0];
        let (ct, tok) = ws[1];
        let (cy, y) = ws[2];
        let xi = g.index(x).ok_or_else(|| syntax(line_no, cx, format!("undeclared node `{x}`")))?;
        let yi = g.index(y).ok_or_else(|| syntax(line_no, cy, format!("undeclared node `{y}`")))?;
        let (mx, my) = match token_marks(tok) {
            Some(m) => m,
            None if tok == "---" => {
                return Err(syntax(line_no, ct, "tail-tail edges are not supported"))
            }
            None => return Err(syntax(line_no, ct, format!("unknown edge token `{tok}`"))),
        };
        g.add_edge(xi, yi, mx, my).map_err(|source| ParseError::Graph {
            line: line_no,
            source,
        })?;
    }
    graph.ok_or_else(|| syntax(1, 1, "missing `nodes:` header"))
}

/// Canonical text: nodes in declaration order, edges sorted by the
/// declaration index of their endpoints.
pub fn render_pmg(g: &Pmg) -> String {
    let mut out = String::from("nodes:");
    for name in g.names() {
        out.push(' ');
        out.push_str(name);
    }
    out.push('\n');
    for (x, y, mx, my) in g.edges() {
        out.push_str(g.name(x));
        out.push(' ');
        out.push_str(marks_token(mx, my));
        out.push(' ');
        out.push_str(g.name(y));
        out.push('\n');
    }
    out
}

/// Edge lines only, as used in reports and JSON payloads.
pub fn render_edge(g: &Pmg, x: usize, y: usize) -> Option<String> {
    g.edge(x, y)
        .map(|(mx, my)| format!("{} {} {}", g.name(x), marks_token(mx, my), g.name(y)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge() {
        let g = parse_pmg("nodes: A B\nA o-o B").unwrap();
        assert!(g.is_nondirected(0, 1));
        assert_eq!(render_pmg(&g), "nodes: A B\nA o-o B\n");
    }

    #[test]
    fn reversed_tokens_are_normalised() {
        let g = parse_pmg("nodes: A B C\nB <-o A\nC <-- B").unwrap();
        assert_eq!(render_pmg(&g), "nodes: A B C\nA o-> B\nB --> C\n");
    }

    #[test]
    fn comments_and_blank_lines() {
        let g = parse_pmg("# header\n\nnodes: A B # two\n  A <-> B   # edge\n").unwrap();
        assert!(g.is_bidirected(0, 1));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_pmg("nodes: A\nA --> A"),
            Err(ParseError::Graph { source: GraphError::SelfLoop(_), .. })
        ));
        assert!(matches!(
            parse_pmg("nodes: A B\nA --> B\nB o-o A"),
            Err(ParseError::Graph { source: GraphError::DuplicateEdge(..), .. })
        ));
        assert!(matches!(
            parse_pmg("nodes: A B\nA --- B"),
            Err(ParseError::Syntax { line: 2, column: 3, .. })
        ));
        assert!(matches!(
            parse_pmg("nodes: A B\nA --> Q"),
            Err(ParseError::Syntax { line: 2, column: 7, .. })
        ));
        assert!(parse_pmg("A --> B").is_err());
        assert!(parse_pmg("nodes: A A").is_err());
        assert!(parse_pmg("nodes: A-1").is_err());
    }

    #[test]
    fn empty_graph() {
        let g = parse_pmg("nodes:").unwrap();
        assert_eq!(render_pmg(&g), "nodes:\n");
    }
}
