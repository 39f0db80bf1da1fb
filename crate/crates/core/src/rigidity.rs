//! Infinitesimal rigidity of planar bar-joint frameworks.
//!
//! The rigidity matrix `R` has one row per edge `(i, j)` holding `p_i - p_j`
//! in the columns of vertex `i` and `p_j - p_i` in those of vertex `j`. A
//! velocity assignment `u` preserves every edge length to first order iff
//! `R u = 0`. The null space always contains the three rigid motions of the
//! plane; anything beyond them is an internal degree of freedom:
//!
//! ```text
//! internal_dof = 2|V| - 3 - rank(R)
//! ```
//!
//! A framework with `internal_dof = 0` is infinitesimally rigid, which
//! implies rigidity. The converse fails for some special positions, so a
//! flexible verdict here means "has a first-order flex", not necessarily a
//! finite motion.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::model::Graph;
use crate::refine::edge_direction_matrix;

/// Dimension of the rigid motions of the plane.
pub const TRIVIAL_DIM: usize = 3;

/// Default relative tolerance for [`numeric_rank`].
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RigidityError {
    #[error("degenerate framework: {0}")]
    DegenerateFramework(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Rigid,
    Flexible,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::Rigid => "rigid",
            Classification::Flexible => "flexible",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RigidityReport {
    pub edge_count: usize,
    pub vertex_count: usize,
    pub rank: usize,
    pub trivial_dim: usize,
    pub internal_dof: usize,
    pub classification: Classification,
    /// Orthonormal non-trivial infinitesimal motions, `2|V|` entries each.
    pub flex_basis: Vec<DVector<f64>>,
    /// Absolute singular-value cutoff used for the rank.
    pub rank_tolerance_used: f64,
    /// Smallest singular value counted in the rank (the rank's margin).
    pub smallest_retained_singular_value: f64,
}

/// `|E| x 2|V|` rigidity matrix.
pub fn rigidity_matrix(g: &Graph) -> DMatrix<f64> {
    edge_direction_matrix(g)
}

/// Singular values (descending) and a full set of right singular vectors.
///
/// Wide matrices are padded with zero rows so the decomposition also yields
/// the directions that lie in the null space only because `rows < cols`.
fn full_svd(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let (rows, cols) = m.shape();
    let square = if rows < cols {
        let mut padded = DMatrix::zeros(cols, cols);
        padded.rows_mut(0, rows).copy_from(m);
        padded
    } else {
        m.clone()
    };
    let svd = square.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let values = order.iter().map(|&k| svd.singular_values[k]).collect();
    let mut v = DMatrix::zeros(cols, order.len());
    for (dst, &k) in order.iter().enumerate() {
        v.column_mut(dst).copy_from(&v_t.row(k).transpose());
    }
    (values, v)
}

fn rank_cutoff(values: &[f64], shape: (usize, usize), tol_factor: f64) -> f64 {
    let largest = values.first().copied().unwrap_or(0.0);
    tol_factor * largest * shape.0.max(shape.1) as f64
}

/// Number of singular values above `tol_factor * sigma_max * max(rows, cols)`.
pub fn numeric_rank(m: &DMatrix<f64>, tol_factor: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let values = m.singular_values();
    let largest = values.iter().fold(0.0f64, |a, &b| a.max(b));
    let cutoff = tol_factor * largest * m.nrows().max(m.ncols()) as f64;
    values.iter().filter(|&&s| s > cutoff).count()
}

/// Rigid motions: x and y translation, rotation about the centroid.
/// Returned orthonormal.
pub fn trivial_motions(g: &Graph) -> DMatrix<f64> {
    let n = g.vertex_count();
    let c = g.centroid();
    let mut t = DMatrix::zeros(2 * n, TRIVIAL_DIM);
    for (i, p) in g.vertices().iter().enumerate() {
        t[(2 * i, 0)] = 1.0;
        t[(2 * i + 1, 1)] = 1.0;
        t[(2 * i, 2)] = -(p.y - c.y);
        t[(2 * i + 1, 2)] = p.x - c.x;
    }
    for mut col in t.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
    t
}

fn is_degenerate(g: &Graph) -> bool {
    let pts = g.vertices();
    if pts.len() < 3 {
        return true;
    }
    let p0 = pts[0];
    let far = pts
        .iter()
        .copied()
        .max_by(|a, b| a.distance(p0).total_cmp(&b.distance(p0)))
        .expect("non-empty");
    let axis = far - p0;
    let len = axis.norm();
    if len == 0.0 {
        return true;
    }
    pts.iter().all(|&q| (axis.cross(q - p0) / len).abs() <= 1e-12 * len)
}

/// Rank, internal degrees of freedom, and a basis of non-trivial flexes.
pub fn analyze_rigidity(g: &Graph) -> Result<RigidityReport, RigidityError> {
    analyze_rigidity_with(g, DEFAULT_RANK_TOLERANCE)
}

pub fn analyze_rigidity_with(g: &Graph, tol_factor: f64) -> Result<RigidityReport, RigidityError> {
    if g.vertex_count() < 3 {
        return Err(RigidityError::DegenerateFramework("fewer than three vertices"));
    }
    if is_degenerate(g) {
        return Err(RigidityError::DegenerateFramework("all vertices are collinear"));
    }
    let r = rigidity_matrix(g);
    let n = r.ncols();
    let (values, v) = full_svd(&r);
    let cutoff = rank_cutoff(&values, r.shape(), tol_factor);
    let rank = values.iter().filter(|&&s| s > cutoff).count();
    let smallest_retained_singular_value = values[..rank].last().copied().unwrap_or(0.0);
    let internal_dof = (n - TRIVIAL_DIM).saturating_sub(rank);

    let flex_basis = if internal_dof == 0 {
        Vec::new()
    } else {
        let null = v.columns(rank, n - rank).into_owned();
        let t = trivial_motions(g);
        let projected = &null - &t * (t.transpose() * &null);
        let svd = projected.svd(true, false);
        let u = svd.u.expect("requested U");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        order
            .into_iter()
            .take(internal_dof)
            .map(|k| u.column(k).into_owned())
            .collect()
    };

    Ok(RigidityReport {
        edge_count: g.edge_count(),
        vertex_count: g.vertex_count(),
        rank,
        trivial_dim: TRIVIAL_DIM,
        internal_dof,
        classification: if internal_dof == 0 {
            Classification::Rigid
        } else {
            Classification::Flexible
        },
        flex_basis,
        rank_tolerance_used: cutoff,
        smallest_retained_singular_value,
    })
}
