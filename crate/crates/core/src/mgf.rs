//! MGF, the line-oriented text format for a single graph.
//!
//! ```text
//! mgf 1
//! # optional comments
//! v 0 0 0
//! v 1 1 0
//! v 2 0.5 0.8660254037844386
//! e 0 1
//! e 1 2
//! e 0 2
//! ```
//!
//! Vertex lines come first, indexed `0..n` in order; edges follow with
//! `i < j`. Fields are separated by single spaces and the file ends with a
//! newline. Coordinates are written in the shortest decimal form that
//! reads back to the same `f64` (at most 17 significant digits).

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{Graph, ModelError, Point2};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError {
        line,
        message: message.into(),
    }
}

pub fn write_mgf(g: &Graph) -> String {
    write_mgf_with_comments(g, &[])
}

/// Writes the graph with `# ` comment lines after the header.
pub fn write_mgf_with_comments(g: &Graph, comments: &[String]) -> String {
    let mut out = String::from("mgf 1\n");
    for c in comments {
        for line in c.lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    for (i, p) in g.vertices().iter().enumerate() {
        let _ = writeln!(out, "v {i} {} {}", p.x, p.y);
    }
    for e in g.edges() {
        let _ = writeln!(out, "e {} {}", e.a, e.b);
    }
    out
}

fn parse_index(field: &str, line: usize) -> Result<usize, FormatError> {
    if field.is_empty() || !field.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err(line, format!("invalid index `{field}`")));
    }
    field
        .parse()
        .map_err(|_| err(line, format!("index `{field}` out of range")))
}

fn parse_coordinate(field: &str, line: usize) -> Result<f64, FormatError> {
    let is_decimal = !field.is_empty()
        && field
            .bytes()
            .all(|b| b.is_ascii_digit() || matches!(b, b'-' | b'.' | b'e' | b'E' | b'+'));
    match field.parse::<f64>() {
        Ok(v) if is_decimal && v.is_finite() => Ok(v),
        _ => Err(err(line, format!("invalid coordinate `{field}`"))),
    }
}

/// Parses an MGF document. Errors carry 1-based line numbers.
pub fn read_mgf(text: &str) -> Result<Graph, FormatError> {
    if !text.ends_with('\n') {
        let last = text.lines().count().max(1);
        return Err(err(last, "missing trailing newline"));
    }
    let mut lines = text.split('\n').enumerate().map(|(i, l)| (i + 1, l));
    // split leaves one empty piece after the final newline
    let total = text.split('\n').count() - 1;
    match lines.next() {
        Some((_, "mgf 1")) => {}
        Some((n, other)) => return Err(err(n, format!("expected header `mgf 1`, found `{other}`"))),
        None => return Err(err(1, "empty document")),
    }

    let mut vertices: Vec<Point2> = Vec::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (n, line) in lines.take(total - 1) {
        if line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(' ').collect();
        match fields.as_slice() {
            ["v", idx, x, y] => {
                if !pairs.is_empty() {
                    return Err(err(n, "vertex line after edge lines"));
                }
                let idx = parse_index(idx, n)?;
                if idx != vertices.len() {
                    return Err(err(n, format!("expected vertex {}, found {idx}", vertices.len())));
                }
                vertices.push(Point2::new(parse_coordinate(x, n)?, parse_coordinate(y, n)?));
            }
            ["e", i, j] => {
                let (i, j) = (parse_index(i, n)?, parse_index(j, n)?);
                if i >= j {
                    return Err(err(n, format!("edge ({i}, {j}) must have i < j")));
                }
                if j >= vertices.len() {
                    return Err(err(
                        n,
                        format!("edge ({i}, {j}) references a vertex outside 0..{}", vertices.len()),
                    ));
                }
                if !seen.insert((i, j)) {
                    return Err(err(n, format!("duplicate edge ({i}, {j})")));
                }
                pairs.push((i, j));
            }
            _ => return Err(err(n, format!("unrecognized line `{line}`"))),
        }
    }
    Graph::new(vertices, &pairs).map_err(|e: ModelError| err(total, e.to_string()))
}
