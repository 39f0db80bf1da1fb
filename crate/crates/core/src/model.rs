//! Graph representation shared by every stage of the pipeline.
//!
//! A [`Graph`] is a framework: vertex coordinates plus an undirected edge
//! list. Values are immutable once built; every transformation returns a new
//! graph.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default minimum distance between two distinct vertices, in the graph's
/// own length units.
pub const DEFAULT_VERTEX_TOLERANCE: f64 = 1e-9;

/// A point in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }
}

impl Add for Point2 {
    type Output = Point2;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    #[inline]
    fn mul(self, rhs: f64) -> Self {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// An undirected edge stored with `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
}

impl Edge {
    /// Normalizes the endpoint order. Does not reject self-loops.
    #[inline]
    pub fn new(i: usize, j: usize) -> Self {
        Self { a: i.min(j), b: i.max(j) }
    }

    #[inline]
    pub fn touches(&self, v: usize) -> bool {
        self.a == v || self.b == v
    }

    #[inline]
    pub fn shares_endpoint(&self, other: &Edge) -> bool {
        self.touches(other.a) || self.touches(other.b)
    }

    /// The endpoint opposite to `v`. `v` must be an endpoint.
    #[inline]
    pub fn other(&self, v: usize) -> usize {
        if self.a == v {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("edge ({i}, {j}) references a vertex outside 0..{n}")]
    IndexOutOfRange { i: usize, j: usize, n: usize },
    #[error("edge ({0}, {0}) is a self-loop")]
    SelfLoop(usize),
    #[error("vertices {i} and {j} are {distance:e} apart, within the merge tolerance {tolerance:e}")]
    DuplicateVertexPosition {
        i: usize,
        j: usize,
        distance: f64,
        tolerance: f64,
    },
    #[error("vertex {0} has a non-finite coordinate")]
    NonFiniteCoordinate(usize),
    #[error("scale must be positive and finite, got {0}")]
    NonPositiveScale(f64),
}

/// A planar framework: vertex positions and unit-length edge constraints.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    vertices: Vec<Point2>,
    edges: Vec<Edge>,
    scale: f64,
}

/// Builds a graph with the default vertex tolerance.
///
/// Edges are deduplicated as unordered pairs and stored with `a < b`, in
/// order of first appearance.
pub fn build_graph(points: Vec<Point2>, edge_pairs: &[(usize, usize)]) -> Result<Graph, ModelError> {
    Graph::with_tolerance(points, edge_pairs, DEFAULT_VERTEX_TOLERANCE)
}

impl Graph {
    pub fn new(points: Vec<Point2>, edge_pairs: &[(usize, usize)]) -> Result<Self, ModelError> {
        build_graph(points, edge_pairs)
    }

    /// Like [`Graph::new`] but with an explicit minimum vertex separation.
    pub fn with_tolerance(
        points: Vec<Point2>,
        edge_pairs: &[(usize, usize)],
        tolerance: f64,
    ) -> Result<Self, ModelError> {
        let n = points.len();
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(ModelError::NonFiniteCoordinate(i));
        }
        let mut seen = HashSet::with_capacity(edge_pairs.len());
        let mut edges = Vec::with_capacity(edge_pairs.len());
        for &(i, j) in edge_pairs {
            if i >= n || j >= n {
                return Err(ModelError::IndexOutOfRange { i, j, n });
            }
            if i == j {
                return Err(ModelError::SelfLoop(i));
            }
            let e = Edge::new(i, j);
            if seen.insert(e) {
                edges.push(e);
            }
        }
        if let Some((i, j, distance)) = closest_pair_within(&points, tolerance) {
            return Err(ModelError::DuplicateVertexPosition {
                i,
                j,
                distance,
                tolerance,
            });
        }
        Ok(Self {
            vertices: points,
            edges,
            scale: 1.0,
        })
    }

    /// Internal constructor for callers that already upheld the invariants.
    pub(crate) fn from_parts(vertices: Vec<Point2>, edges: Vec<Edge>, scale: f64) -> Self {
        Self {
            vertices,
            edges,
            scale,
        }
    }

    #[inline]
    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    #[inline]
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Length of one unit edge, in the units of the stored coordinates.
    #[inline]
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub(crate) fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    #[inline]
    pub fn edge_length(&self, e: Edge) -> f64 {
        self.vertices[e.a].distance(self.vertices[e.b])
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        self.edges.iter().map(|&e| self.edge_length(e)).collect()
    }

    /// Neighbor lists, each sorted ascending.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for e in &self.edges {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn centroid(&self) -> Point2 {
        let n = self.vertices.len().max(1) as f64;
        let sum = self
            .vertices
            .iter()
            .fold(Point2::default(), |acc, &p| acc + p);
        sum * (1.0 / n)
    }

    /// Same edges, coordinates replaced. The caller keeps vertices distinct.
    pub fn with_vertices(&self, vertices: Vec<Point2>) -> Self {
        assert_eq!(vertices.len(), self.vertices.len(), "vertex count changed");
        Self {
            vertices,
            edges: self.edges.clone(),
            scale: self.scale,
        }
    }

    /// Applies `f` to every vertex position.
    pub fn map_points(&self, f: impl Fn(Point2) -> Point2) -> Self {
        self.with_vertices(self.vertices.iter().map(|&p| f(p)).collect())
    }

    /// Relabels vertices: old vertex `i` becomes new vertex `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.vertices.len());
        let mut vertices = vec![Point2::default(); perm.len()];
        for (old, &new) in perm.iter().enumerate() {
            vertices[new] = self.vertices[old];
        }
        let edges = self
            .edges
            .iter()
            .map(|e| Edge::new(perm[e.a], perm[e.b]))
            .collect();
        Self {
            vertices,
            edges,
            scale: self.scale,
        }
    }
}

fn closest_pair_within(points: &[Point2], tolerance: f64) -> Option<(usize, usize, f64)> {
    if points.len() < 2 {
        return None;
    }
    // Sweep over x; only pairs with |dx| <= tolerance can be close.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| points[i].x.total_cmp(&points[j].x));
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if points[j].x - points[i].x > tolerance {
                break;
            }
            let d = points[i].distance(points[j]);
            if d <= tolerance {
                return Some((i.min(j), i.max(j), d));
            }
        }
    }
    None
}

/// Degree of every vertex.
pub fn degree_sequence(g: &Graph) -> Vec<usize> {
    let mut deg = vec![0; g.vertex_count()];
    for e in g.edges() {
        deg[e.a] += 1;
        deg[e.b] += 1;
    }
    deg
}

/// Degree-regularity class of a graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RegularityClass {
    /// Every vertex has degree 4.
    FourRegular,
    /// Degrees are all 2 or 4, with this many (at least one) of degree 2.
    TwoFourRegular(usize),
    /// Anything else, with the full degree histogram.
    Irregular(BTreeMap<usize, usize>),
}

impl RegularityClass {
    /// True for the two classes the catalog accepts as matchstick examples.
    pub fn is_regular(&self) -> bool {
        !matches!(self, RegularityClass::Irregular(_))
    }
}

impl fmt::Display for RegularityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegularityClass::FourRegular => f.write_str("FourRegular"),
            RegularityClass::TwoFourRegular(k) => write!(f, "TwoFourRegular({k})"),
            RegularityClass::Irregular(hist) => {
                f.write_str("Irregular{")?;
                for (i, (d, c)) in hist.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{d}:{c}")?;
                }
                f.write_str("}")
            }
        }
    }
}

pub fn classify_regularity(g: &Graph) -> RegularityClass {
    let mut hist = BTreeMap::new();
    for d in degree_sequence(g) {
        *hist.entry(d).or_insert(0usize) += 1;
    }
    let twos = hist.get(&2).copied().unwrap_or(0);
    let fours = hist.get(&4).copied().unwrap_or(0);
    let total = g.vertex_count();
    if total > 0 && fours == total {
        RegularityClass::FourRegular
    } else if twos >= 1 && fours >= 1 && twos + fours == total {
        RegularityClass::TwoFourRegular(twos)
    } else {
        RegularityClass::Irregular(hist)
    }
}

/// Labels each vertex with its component index; components are numbered by
/// their smallest vertex.
pub fn component_labels(g: &Graph) -> (Vec<usize>, usize) {
    let adj = g.adjacency();
    let mut label = vec![usize::MAX; g.vertex_count()];
    let mut count = 0;
    let mut stack = Vec::new();
    for start in 0..g.vertex_count() {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = count;
        stack.push(start);
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if label[w] == usize::MAX {
                    label[w] = count;
                    stack.push(w);
                }
            }
        }
        count += 1;
    }
    (label, count)
}

pub fn is_connected(g: &Graph) -> bool {
    component_labels(g).1 <= 1
}

/// Splits a graph into connected components.
///
/// Components are ordered by their smallest original vertex index, and
/// vertices inside a component keep their relative order.
pub fn connected_components(g: &Graph) -> Vec<Graph> {
    let (label, count) = component_labels(g);
    let mut local = vec![0usize; g.vertex_count()];
    let mut vertices: Vec<Vec<Point2>> = vec![Vec::new(); count];
    for (v, &c) in label.iter().enumerate() {
        local[v] = vertices[c].len();
        vertices[c].push(g.vertices[v]);
    }
    let mut edges: Vec<Vec<Edge>> = vec![Vec::new(); count];
    for e in g.edges() {
        let c = label[e.a];
        edges[c].push(Edge::new(local[e.a], local[e.b]));
    }
    vertices
        .into_iter()
        .zip(edges)
        .map(|(v, e)| Graph::from_parts(v, e, g.scale))
        .collect()
}
