//! Turning figure source text into graphs.
//!
//! Figures list every edge as a drawn segment `(x1,y1) -- (x2,y2)`, repeating
//! shared vertex coordinates once per incident edge and occasionally with a
//! last-digit rounding difference. Ingestion extracts those segments, merges
//! endpoints that are closer than a tolerance into a single vertex, and
//! rescales so that edges have unit length.

use std::collections::HashMap;
use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

use crate::model::{Graph, ModelError, Point2};

/// A drawn line segment in raw figure units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub a: Point2,
    pub b: Point2,
}

impl Segment {
    pub fn length(&self) -> f64 {
        self.a.distance(self.b)
    }
}

/// Tolerances for [`unify_endpoints`] and [`estimate_scale`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IngestOptions {
    /// Endpoints closer than this (raw units) are the same vertex.
    pub merge_tolerance: f64,
    /// Raw length of a unit edge, if known in advance.
    pub expected_unit: Option<f64>,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            merge_tolerance: 0.01,
            expected_unit: None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("malformed coordinate `{text}` at byte {offset}")]
    MalformedCoordinate { text: String, offset: usize },
    #[error("segment {index} has zero length")]
    ZeroLengthSegment { index: usize },
    #[error("no segments found")]
    NoSegments,
    #[error("merged vertex group has diameter {diameter:e}, above 3x the merge tolerance {tolerance:e}")]
    MergeAmbiguity { diameter: f64, tolerance: f64 },
    #[error("merge tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("graph has no edges")]
    NoEdges,
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn pair_pattern() -> &'static Regex {
    static PATTERN: OnceLock<Regex> = OnceLock::new();
    PATTERN.get_or_init(|| {
        Regex::new(r"\(\s*([^\s,()]+)\s*,\s*([^\s,()]+)\s*\)").expect("valid pattern")
    })
}

fn parse_number(text: &str, offset: usize) -> Result<f64, IngestError> {
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(IngestError::MalformedCoordinate {
            text: text.to_owned(),
            offset,
        }),
    }
}

/// Extracts every `(x,y) -- (x,y)` segment from arbitrary text.
///
/// Chains `A -- B -- C` yield `(A,B)` and `(B,C)`. Coordinate pairs not
/// joined to a neighbour by `--` are ignored, as is all other text.
pub fn extract_segments(text: &str) -> Result<Vec<Segment>, IngestError> {
    struct Pair<'t> {
        start: usize,
        end: usize,
        x: (&'t str, usize),
        y: (&'t str, usize),
    }
    let pairs: Vec<Pair<'_>> = pair_pattern()
        .captures_iter(text)
        .map(|c| {
            let whole = c.get(0).expect("group 0");
            let x = c.get(1).expect("group 1");
            let y = c.get(2).expect("group 2");
            Pair {
                start: whole.start(),
                end: whole.end(),
                x: (x.as_str(), x.start()),
                y: (y.as_str(), y.start()),
            }
        })
        .collect();

    let point = |p: &Pair<'_>| -> Result<Point2, IngestError> {
        Ok(Point2::new(parse_number(p.x.0, p.x.1)?, parse_number(p.y.0, p.y.1)?))
    };

    let mut segments = Vec::new();
    for w in pairs.windows(2) {
        if text[w[0].end..w[1].start].trim() != "--" {
            continue;
        }
        let seg = Segment {
            a: point(&w[0])?,
            b: point(&w[1])?,
        };
        if seg.length() == 0.0 {
            return Err(IngestError::ZeroLengthSegment {
                index: segments.len(),
            });
        }
        segments.push(seg);
    }
    Ok(segments)
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Merges nearby segment endpoints into vertices and builds the graph.
///
/// Grouping is the transitive closure of "closer than `merge_tolerance`".
/// Each group becomes one vertex at the group centroid, numbered by first
/// appearance in the segment list. The returned graph keeps raw
/// coordinates; its scale is [`estimate_scale`] of the result.
pub fn unify_endpoints(segments: &[Segment], opts: &IngestOptions) -> Result<Graph, IngestError> {
    let tol = opts.merge_tolerance;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(IngestError::InvalidTolerance(tol));
    }
    if segments.is_empty() {
        return Err(IngestError::NoSegments);
    }
    let points: Vec<Point2> = segments.iter().flat_map(|s| [s.a, s.b]).collect();

    // Uniform grid with cell size tol: close points are in adjacent cells.
    let cell = |p: Point2| ((p.x / tol).floor() as i64, (p.y / tol).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, &p) in points.iter().enumerate() {
        grid.entry(cell(p)).or_default().push(i);
    }
    let mut sets = DisjointSet::new(points.len());
    for (i, &p) in points.iter().enumerate() {
        let (cx, cy) = cell(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                let Some(bucket) = grid.get(&(cx + dx, cy + dy)) else {
                    continue;
                };
                for &j in bucket {
                    if j > i && p.distance(points[j]) < tol {
                        sets.union(i, j);
                    }
                }
            }
        }
    }

    let mut vertex_of_root: HashMap<usize, usize> = HashMap::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut vertex_of_point = Vec::with_capacity(points.len());
    for i in 0..points.len() {
        let root = sets.find(i);
        let v = *vertex_of_root.entry(root).or_insert_with(|| {
            members.push(Vec::new());
            members.len() - 1
        });
        members[v].push(i);
        vertex_of_point.push(v);
    }

    let mut vertices = Vec::with_capacity(members.len());
    for group in &members {
        let mut diameter: f64 = 0.0;
        for (k, &i) in group.iter().enumerate() {
            for &j in &group[k + 1..] {
                diameter = diameter.max(points[i].distance(points[j]));
            }
        }
        if diameter > 3.0 * tol {
            return Err(IngestError::MergeAmbiguity {
                diameter,
                tolerance: tol,
            });
        }
        let sum = group.iter().fold(Point2::default(), |acc, &i| acc + points[i]);
        vertices.push(sum * (1.0 / group.len() as f64));
    }

    let pairs: Vec<(usize, usize)> = (0..segments.len())
        .map(|s| (vertex_of_point[2 * s], vertex_of_point[2 * s + 1]))
        .collect();
    let graph = Graph::with_tolerance(vertices, &pairs, tol)?;
    let scale = estimate_scale(&graph, opts)?;
    Ok(graph.with_scale(scale))
}

/// Raw length of a unit edge: `expected_unit` if set, else the median edge
/// length of `g`.
pub fn estimate_scale(g: &Graph, opts: &IngestOptions) -> Result<f64, IngestError> {
    if g.edge_count() == 0 {
        return Err(IngestError::NoEdges);
    }
    if let Some(unit) = opts.expected_unit {
        return Ok(unit);
    }
    let mut lengths = g.edge_lengths();
    lengths.sort_by(f64::total_cmp);
    let n = lengths.len();
    Ok(if n % 2 == 1 {
        lengths[n / 2]
    } else {
        0.5 * (lengths[n / 2 - 1] + lengths[n / 2])
    })
}

/// Divides every coordinate by `scale`; the result has scale 1.
pub fn normalize(g: &Graph, scale: f64) -> Result<Graph, ModelError> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(ModelError::NonPositiveScale(scale));
    }
    let inv = 1.0 / scale;
    let out = if scale == 1.0 {
        g.clone()
    } else {
        g.map_points(|p| p * inv)
    };
    Ok(out.with_scale(1.0))
}

/// Extract, unify, and split into components in one call.
///
/// Components come back in raw units, each carrying the scale estimated over
/// the whole figure, since all examples in one figure share one edge length.
pub fn ingest_figure(text: &str, opts: &IngestOptions) -> Result<Vec<Graph>, IngestError> {
    let segments = extract_segments(text)?;
    let graph = unify_endpoints(&segments, opts)?;
    let scale = graph.scale();
    Ok(crate::model::connected_components(&graph)
        .into_iter()
        .map(|c| c.with_scale(scale))
        .collect())
}
