//! Flat per-graph JSON records.
//!
//! Every command emits the same record shape, with `null` for stages that
//! did not run. Field order is fixed by declaration order, and floats are
//! written in shortest round-trip form, so repeated runs are byte-identical.

use serde::Serialize;

use crate::model::Graph;
use crate::refine::RefinementTrace;
use crate::rigidity::{Classification, RigidityReport};
use crate::verify::{Failure, VerificationReport};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefinementSummary {
    pub iterations: usize,
    pub final_max_residual: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphRecord {
    pub id: String,
    pub vertices: usize,
    pub edges: usize,
    pub regularity: String,
    pub max_length_deviation: Option<f64>,
    pub min_separation: Option<f64>,
    pub connected: Option<bool>,
    pub rank: Option<usize>,
    pub internal_dof: Option<usize>,
    pub classification: Option<Classification>,
    pub degree2_distance: Option<f64>,
    pub refinement: Option<RefinementSummary>,
    /// `pass` or `fail` when verification ran.
    pub verdict: Option<&'static str>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<Failure>,
}

impl GraphRecord {
    pub fn new(id: impl Into<String>, g: &Graph) -> Self {
        Self {
            id: id.into(),
            vertices: g.vertex_count(),
            edges: g.edge_count(),
            regularity: crate::model::classify_regularity(g).to_string(),
            max_length_deviation: None,
            min_separation: None,
            connected: None,
            rank: None,
            internal_dof: None,
            classification: None,
            degree2_distance: None,
            refinement: None,
            verdict: None,
            failures: Vec::new(),
        }
    }

    pub fn with_verification(mut self, r: &VerificationReport) -> Self {
        self.regularity = r.regularity.to_string();
        self.max_length_deviation = Some(r.max_length_deviation);
        self.min_separation = Some(r.min_nonadjacent_separation);
        self.connected = Some(r.connected);
        self.verdict = Some(if r.passed() { "pass" } else { "fail" });
        self.failures = r.failures.clone();
        self
    }

    pub fn with_rigidity(mut self, r: &RigidityReport) -> Self {
        self.rank = Some(r.rank);
        self.internal_dof = Some(r.internal_dof);
        self.classification = Some(r.classification);
        self
    }

    pub fn with_refinement(mut self, t: &RefinementTrace) -> Self {
        self.refinement = Some(RefinementSummary {
            iterations: t.iterations,
            final_max_residual: t.final_max_residual,
            converged: t.converged,
        });
        self
    }

    pub fn with_degree2_distance(mut self, d: Option<f64>) -> Self {
        self.degree2_distance = d;
        self
    }
}
