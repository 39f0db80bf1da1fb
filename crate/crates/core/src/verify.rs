//! Checks that a realized graph is a matchstick graph.
//!
//! A matchstick graph has every edge of unit length, and no two edges meet
//! except at a shared endpoint. Numerically that becomes: every edge length
//! within `length_tolerance` of 1, and every pair of features that must not
//! touch at least `separation_delta` apart. The features compared are vertex
//! pairs, vertices against edges not incident to them, edge pairs with no
//! common endpoint, and, for two edges sharing an endpoint, the far endpoint
//! of each against the other edge (so they cannot fold onto each other).

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{point_segment_distance, segment_segment_distance};
use crate::model::{classify_regularity, component_labels, degree_sequence, Edge, Graph, RegularityClass};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("length tolerance must be in (0, 0.5), got {0}")]
    LengthTolerance(f64),
    #[error("separation delta must be in (0, 0.1), got {0}")]
    SeparationDelta(f64),
    #[error("expected exactly two vertices of degree 2, found class {0}")]
    WrongClass(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerificationPolicy {
    length_tolerance: f64,
    separation_delta: f64,
    require_connected: bool,
}

impl VerificationPolicy {
    pub fn new(length_tolerance: f64, separation_delta: f64, require_connected: bool) -> Result<Self, VerifyError> {
        if !(length_tolerance > 0.0 && length_tolerance < 0.5) {
            return Err(VerifyError::LengthTolerance(length_tolerance));
        }
        if !(separation_delta > 0.0 && separation_delta < 0.1) {
            return Err(VerifyError::SeparationDelta(separation_delta));
        }
        Ok(Self {
            length_tolerance,
            separation_delta,
            require_connected,
        })
    }

    /// Loose policy for coordinates read straight from a figure.
    pub fn pre_refine() -> Self {
        Self {
            length_tolerance: 1e-3,
            ..Self::default()
        }
    }

    pub fn length_tolerance(&self) -> f64 {
        self.length_tolerance
    }

    pub fn separation_delta(&self) -> f64 {
        self.separation_delta
    }

    pub fn require_connected(&self) -> bool {
        self.require_connected
    }
}

impl Default for VerificationPolicy {
    /// Policy for refined coordinates.
    fn default() -> Self {
        Self {
            length_tolerance: 1e-9,
            separation_delta: 1e-6,
            require_connected: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LengthCheck {
    pub max_deviation: f64,
    pub worst_edge: Option<Edge>,
    pub pass: bool,
}

/// Largest `| |p_i - p_j| - 1 |` over all edges.
pub fn check_unit_lengths(g: &Graph, tol: f64) -> LengthCheck {
    let mut worst: Option<(f64, Edge)> = None;
    for &e in g.edges() {
        let dev = (g.edge_length(e) - 1.0).abs();
        if worst.is_none_or(|(w, we)| dev > w || (dev == w && e < we)) {
            worst = Some((dev, e));
        }
    }
    let max_deviation = worst.map_or(0.0, |(d, _)| d);
    LengthCheck {
        max_deviation,
        worst_edge: worst.map(|(_, e)| e),
        pass: max_deviation <= tol,
    }
}

/// The pair of features realizing a minimum separation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeparationWitness {
    VertexVertex { a: usize, b: usize },
    VertexEdge { vertex: usize, edge: (usize, usize) },
    EdgeEdge { first: (usize, usize), second: (usize, usize) },
    IncidentEdges { first: (usize, usize), second: (usize, usize) },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeparationCheck {
    /// Minimum over vertex pairs, vertex/non-incident edge pairs and edge
    /// pairs without a common endpoint.
    pub min_separation: f64,
    pub witness: Option<SeparationWitness>,
    pub min_vertex_distance: f64,
    /// Minimum clearance between edges that share an endpoint.
    pub min_incident_clearance: f64,
    pub incident_witness: Option<SeparationWitness>,
    pub pass: bool,
}

#[derive(Default)]
struct Minimum {
    value: Option<(f64, SeparationWitness)>,
}

impl Minimum {
    fn offer(&mut self, d: f64, w: SeparationWitness) {
        // Ties resolve on the witness so the result ignores input order.
        if self.value.is_none_or(|(v, vw)| d < v || (d == v && w < vw)) {
            self.value = Some((d, w));
        }
    }

    fn get(&self) -> (f64, Option<SeparationWitness>) {
        self.value.map_or((f64::INFINITY, None), |(d, w)| (d, Some(w)))
    }
}

fn pair(e: Edge) -> (usize, usize) {
    (e.a, e.b)
}

fn ordered(e: Edge, f: Edge) -> ((usize, usize), (usize, usize)) {
    if e <= f {
        (pair(e), pair(f))
    } else {
        (pair(f), pair(e))
    }
}

/// Minimum distance between features that must not touch.
pub fn check_separation(g: &Graph, delta: f64) -> SeparationCheck {
    let pts = g.vertices();
    let edges = g.edges();
    let mut apart = Minimum::default();
    let mut incident = Minimum::default();

    let mut min_vertex_distance = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = pts[i].distance(pts[j]);
            min_vertex_distance = min_vertex_distance.min(d);
            apart.offer(d, SeparationWitness::VertexVertex { a: i, b: j });
        }
    }
    for (v, &p) in pts.iter().enumerate() {
        for &e in edges {
            if !e.touches(v) {
                apart.offer(
                    point_segment_distance(p, pts[e.a], pts[e.b]),
                    SeparationWitness::VertexEdge { vertex: v, edge: pair(e) },
                );
            }
        }
    }
    for (k, &e) in edges.iter().enumerate() {
        for &f in &edges[k + 1..] {
            let (first, second) = ordered(e, f);
            if !e.shares_endpoint(&f) {
                let d = segment_segment_distance(pts[e.a], pts[e.b], pts[f.a], pts[f.b]);
                apart.offer(d, SeparationWitness::EdgeEdge { first, second });
            } else if e != f {
                let shared = if e.touches(f.a) { f.a } else { f.b };
                let (x, y) = (e.other(shared), f.other(shared));
                let d = point_segment_distance(pts[x], pts[shared], pts[y])
                    .min(point_segment_distance(pts[y], pts[shared], pts[x]));
                incident.offer(d, SeparationWitness::IncidentEdges { first, second });
            }
        }
    }

    let (min_separation, witness) = apart.get();
    let (min_incident_clearance, incident_witness) = incident.get();
    SeparationCheck {
        min_separation,
        witness,
        min_vertex_distance,
        min_incident_clearance,
        incident_witness,
        pass: min_separation >= delta && min_incident_clearance >= delta,
    }
}

/// Why a graph failed verification.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Failure {
    NotNormalized { scale: f64 },
    NoEdges,
    EdgeLength { edge: (usize, usize), deviation: f64 },
    Separation { witness: Option<SeparationWitness>, distance: f64 },
    IncidentOverlap { witness: Option<SeparationWitness>, distance: f64 },
    Disconnected { components: usize },
    Irregular { class: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub max_length_deviation: f64,
    pub worst_edge: Option<Edge>,
    pub min_nonadjacent_separation: f64,
    pub separation_witness: Option<SeparationWitness>,
    pub min_incident_clearance: f64,
    pub regularity: RegularityClass,
    pub connected: bool,
    pub failures: Vec<Failure>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs every check. The verdict passes only for connected (if required),
/// unit-length, well-separated graphs that are 4-regular or (2,4)-regular.
pub fn verify_matchstick(g: &Graph, policy: &VerificationPolicy) -> VerificationReport {
    let lengths = check_unit_lengths(g, policy.length_tolerance);
    let separation = check_separation(g, policy.separation_delta);
    let regularity = classify_regularity(g);
    let components = component_labels(g).1;
    let connected = components <= 1;

    let mut failures = Vec::new();
    if (g.scale() - 1.0).abs() > 0.0 {
        failures.push(Failure::NotNormalized { scale: g.scale() });
    }
    if g.edge_count() == 0 {
        failures.push(Failure::NoEdges);
    }
    if !lengths.pass {
        failures.push(Failure::EdgeLength {
            edge: lengths.worst_edge.map(pair).unwrap_or_default(),
            deviation: lengths.max_deviation,
        });
    }
    if separation.min_separation < policy.separation_delta {
        failures.push(Failure::Separation {
            witness: separation.witness,
            distance: separation.min_separation,
        });
    }
    if separation.min_incident_clearance < policy.separation_delta {
        failures.push(Failure::IncidentOverlap {
            witness: separation.incident_witness,
            distance: separation.min_incident_clearance,
        });
    }
    if policy.require_connected && !connected {
        failures.push(Failure::Disconnected { components });
    }
    if !regularity.is_regular() {
        failures.push(Failure::Irregular {
            class: regularity.to_string(),
        });
    }

    VerificationReport {
        max_length_deviation: lengths.max_deviation,
        worst_edge: lengths.worst_edge,
        min_nonadjacent_separation: separation.min_separation,
        separation_witness: separation.witness,
        min_incident_clearance: separation.min_incident_clearance,
        regularity,
        connected,
        failures,
    }
}

/// Distance between the two degree-2 vertices, in edge lengths.
pub fn degree2_distance(g: &Graph) -> Result<f64, VerifyError> {
    let twos: Vec<usize> = degree_sequence(g)
        .iter()
        .enumerate()
        .filter(|&(_, &d)| d == 2)
        .map(|(v, _)| v)
        .collect();
    match (classify_regularity(g), twos.as_slice()) {
        (RegularityClass::TwoFourRegular(2), &[a, b]) => Ok(g.vertices()[a].distance(g.vertices()[b])),
        (class, _) => Err(VerifyError::WrongClass(class.to_string())),
    }
}
