//! Snapping near-unit frameworks onto exact unit edge lengths.
//!
//! The residual of edge `(i, j)` is `|p_i - p_j|^2 - 1`. Coordinates copied
//! from a figure carry four decimals, so residuals start around `1e-5`; a
//! Levenberg-Marquardt iteration then drives them to rounding level in a few
//! Gauss-Newton-like steps.
//!
//! No vertex is pinned. The normal matrix `J^T J` is singular along the
//! three rigid motions (more for flexible graphs), and the `lambda I` term
//! keeps the damped system positive definite. Because `J^T r` has no
//! component along those null directions, steps never drift the framework
//! as a whole.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::model::{Graph, Point2};

const LAMBDA_MIN: f64 = 1e-12;
const LAMBDA_MAX: f64 = 1e12;

/// Shortest edge length tolerated during iteration.
pub const COLLAPSE_LENGTH: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefineOptions {
    pub max_iterations: usize,
    /// Target for `max |r_e|`.
    pub residual_target: f64,
    pub initial_damping: f64,
    pub damping_factor: f64,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            residual_target: 1e-12,
            initial_damping: 1e-3,
            damping_factor: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefinementTrace {
    /// Number of damped solves, accepted or not.
    pub iterations: usize,
    pub accepted_steps: usize,
    pub initial_max_residual: f64,
    pub final_max_residual: f64,
    pub converged: bool,
    /// Largest distance any vertex moved from its input position.
    pub max_vertex_displacement: f64,
    /// Sum of squared residuals at the start and after each accepted step.
    pub cost_history: Vec<f64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RefineError {
    #[error("no convergence after {} iterations (max residual {:e})", .trace.iterations, .trace.final_max_residual)]
    DidNotConverge { trace: RefinementTrace },
    #[error("edge ({a}, {b}) collapsed to length {length:e}")]
    DegenerateConfiguration { a: usize, b: usize, length: f64 },
    #[error("invalid refine options: {0}")]
    InvalidOptions(&'static str),
}

/// `|p_i - p_j|^2 - 1` for every edge, in edge-list order.
pub fn residuals(g: &Graph) -> Vec<f64> {
    residuals_at(g, g.vertices())
}

fn residuals_at(g: &Graph, pts: &[Point2]) -> Vec<f64> {
    g.edges()
        .iter()
        .map(|e| (pts[e.a] - pts[e.b]).norm_squared() - 1.0)
        .collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, r| m.max(r.abs()))
}

fn sum_squares(v: &[f64]) -> f64 {
    v.iter().map(|r| r * r).sum()
}

/// Jacobian of [`residuals`]: `|E|` rows by `2|V|` columns, x and y of vertex
/// `i` in columns `2i` and `2i + 1`.
pub fn jacobian(g: &Graph) -> DMatrix<f64> {
    let mut j = edge_direction_matrix(g);
    j *= 2.0;
    j
}

/// Rows `(p_i - p_j, p_j - p_i)` for every edge; half the Jacobian.
pub(crate) fn edge_direction_matrix(g: &Graph) -> DMatrix<f64> {
    let pts = g.vertices();
    let mut m = DMatrix::zeros(g.edge_count(), 2 * g.vertex_count());
    for (row, e) in g.edges().iter().enumerate() {
        let d = pts[e.a] - pts[e.b];
        m[(row, 2 * e.a)] = d.x;
        m[(row, 2 * e.a + 1)] = d.y;
        m[(row, 2 * e.b)] = -d.x;
        m[(row, 2 * e.b + 1)] = -d.y;
    }
    m
}

/// Assembles `J^T J` and `J^T r` block by block without forming `J`.
fn normal_equations(g: &Graph, pts: &[Point2], r: &[f64]) -> (DMatrix<f64>, DVector<f64>) {
    let n = 2 * pts.len();
    let mut jtj = DMatrix::zeros(n, n);
    let mut jtr = DVector::zeros(n);
    for (e, &res) in g.edges().iter().zip(r) {
        let d = (pts[e.a] - pts[e.b]) * 2.0;
        let g_row = [d.x, d.y, -d.x, -d.y];
        let cols = [2 * e.a, 2 * e.a + 1, 2 * e.b, 2 * e.b + 1];
        for (k, &ck) in cols.iter().enumerate() {
            jtr[ck] += g_row[k] * res;
            for (l, &cl) in cols.iter().enumerate() {
                jtj[(ck, cl)] += g_row[k] * g_row[l];
            }
        }
    }
    (jtj, jtr)
}

fn shortest_edge(g: &Graph, pts: &[Point2]) -> Option<(usize, usize, f64)> {
    g.edges()
        .iter()
        .map(|e| (e.a, e.b, pts[e.a].distance(pts[e.b])))
        .min_by(|x, y| x.2.total_cmp(&y.2))
}

/// Refines `g` so every edge has unit length to `residual_target`.
///
/// Solves `(J^T J + lambda I) delta = -J^T r` and accepts the step only if
/// the residual sum of squares decreases; `lambda` is divided by
/// `damping_factor` on acceptance and multiplied on rejection, within
/// `[1e-12, 1e12]`. Trial steps that shrink an edge below
/// [`COLLAPSE_LENGTH`] are rejected the same way.
pub fn refine(g: &Graph, opts: &RefineOptions) -> Result<(Graph, RefinementTrace), RefineError> {
    if opts.max_iterations == 0 {
        return Err(RefineError::InvalidOptions("max_iterations must be positive"));
    }
    if !opts.residual_target.is_finite() || opts.residual_target <= 0.0 {
        return Err(RefineError::InvalidOptions("residual_target must be positive"));
    }
    if !opts.initial_damping.is_finite() || opts.initial_damping <= 0.0 {
        return Err(RefineError::InvalidOptions("initial_damping must be positive"));
    }
    if !opts.damping_factor.is_finite() || opts.damping_factor <= 1.0 {
        return Err(RefineError::InvalidOptions("damping_factor must exceed 1"));
    }
    let start = g.vertices();
    if let Some((a, b, length)) = shortest_edge(g, start) {
        if length < COLLAPSE_LENGTH {
            return Err(RefineError::DegenerateConfiguration { a, b, length });
        }
    }

    let mut pts = start.to_vec();
    let mut r = residuals_at(g, &pts);
    let mut cost = sum_squares(&r);
    let initial_max_residual = max_abs(&r);
    let mut lambda = opts.initial_damping.clamp(LAMBDA_MIN, LAMBDA_MAX);
    let mut iterations = 0;
    let mut accepted_steps = 0;
    let mut cost_history = vec![cost];

    while max_abs(&r) > opts.residual_target && iterations < opts.max_iterations {
        iterations += 1;
        let (mut lhs, jtr) = normal_equations(g, &pts, &r);
        for k in 0..lhs.nrows() {
            lhs[(k, k)] += lambda;
        }
        let Some(chol) = lhs.cholesky() else {
            lambda = (lambda * opts.damping_factor).min(LAMBDA_MAX);
            continue;
        };
        let step = chol.solve(&(-jtr));
        let trial: Vec<Point2> = pts
            .iter()
            .enumerate()
            .map(|(i, &p)| p + Point2::new(step[2 * i], step[2 * i + 1]))
            .collect();
        let collapsed = shortest_edge(g, &trial).is_some_and(|(_, _, l)| l < COLLAPSE_LENGTH);
        let trial_r = residuals_at(g, &trial);
        let trial_cost = sum_squares(&trial_r);
        if !collapsed && trial_cost < cost {
            pts = trial;
            r = trial_r;
            cost = trial_cost;
            cost_history.push(cost);
            accepted_steps += 1;
            lambda = (lambda / opts.damping_factor).max(LAMBDA_MIN);
        } else {
            lambda = (lambda * opts.damping_factor).min(LAMBDA_MAX);
        }
    }

    let final_max_residual = max_abs(&r);
    let max_vertex_displacement = pts
        .iter()
        .zip(start)
        .fold(0.0, |m: f64, (&p, &q)| m.max(p.distance(q)));
    let trace = RefinementTrace {
        iterations,
        accepted_steps,
        initial_max_residual,
        final_max_residual,
        converged: final_max_residual <= opts.residual_target,
        max_vertex_displacement,
        cost_history,
    };
    if !trace.converged {
        return Err(RefineError::DidNotConverge { trace });
    }
    Ok((g.with_vertices(pts), trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_graph;
    use crate::model::fixtures::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    #[test]
    fn residuals_of_triangle_and_long_edge() {
        assert!(max_abs(&residuals(&unit_triangle())) < 1e-15);
        let g = build_graph(vec![p(0.0, 0.0), p(1.1, 0.0)], &[(0, 1)]).unwrap();
        assert!((residuals(&g)[0] - 0.21).abs() < 1e-12);
    }

    #[test]
    fn jacobian_of_single_edge() {
        let g = build_graph(vec![p(0.0, 0.0), p(1.0, 0.0)], &[(0, 1)]).unwrap();
        let j = jacobian(&g);
        assert_eq!(j.shape(), (1, 4));
        assert_eq!(j.row(0).iter().copied().collect::<Vec<_>>(), vec![-2.0, 0.0, 2.0, 0.0]);
        // Edge written as (1, 0) in space: vertex order flips the signs.
        let g = build_graph(vec![p(1.0, 0.0), p(0.0, 0.0)], &[(0, 1)]).unwrap();
        assert_eq!(jacobian(&g).row(0).iter().copied().collect::<Vec<_>>(), vec![2.0, 0.0, -2.0, 0.0]);
    }

    #[test]
    fn jacobian_of_triangle_has_two_blocks_per_row() {
        let j = jacobian(&unit_triangle());
        assert_eq!(j.shape(), (3, 6));
        for row in j.row_iter() {
            let blocks = (0..3).filter(|&k| row[2 * k] != 0.0 || row[2 * k + 1] != 0.0).count();
            assert_eq!(blocks, 2);
        }
    }

    fn central_difference(g: &Graph, h: f64) -> DMatrix<f64> {
        let n = 2 * g.vertex_count();
        let mut fd = DMatrix::zeros(g.edge_count(), n);
        for col in 0..n {
            let shift = |s: f64| {
                let mut pts = g.vertices().to_vec();
                if col % 2 == 0 {
                    pts[col / 2].x += s;
                } else {
                    pts[col / 2].y += s;
                }
                residuals(&g.with_vertices(pts))
            };
            let (plus, minus) = (shift(h), shift(-h));
            for row in 0..g.edge_count() {
                fd[(row, col)] = (plus[row] - minus[row]) / (2.0 * h);
            }
        }
        fd
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let n = rng.gen_range(3..9);
            let pts: Vec<_> = (0..n)
                .map(|i| p(i as f64 * 0.7 + rng.gen_range(-0.3..0.3), rng.gen_range(-2.0..2.0)))
                .collect();
            let pairs: Vec<_> = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .filter(|_| rng.gen_bool(0.5))
                .collect();
            let g = build_graph(pts, &pairs).unwrap();
            let (j, fd) = (jacobian(&g), central_difference(&g, 1e-6));
            for (a, b) in j.iter().zip(fd.iter()) {
                assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn exact_triangle_is_a_fixed_point() {
        let (out, trace) = refine(&unit_triangle(), &RefineOptions::default()).unwrap();
        assert!(trace.converged);
        assert!(trace.iterations <= 1);
        assert_eq!(trace.max_vertex_displacement, 0.0);
        assert_eq!(out, unit_triangle());
    }

    #[test]
    fn perturbed_triangle_converges() {
        let t = unit_triangle();
        let mut pts = t.vertices().to_vec();
        pts[2] = pts[2] + p(0.006, -0.008);
        let (out, trace) = refine(&t.with_vertices(pts), &RefineOptions::default()).unwrap();
        assert!(trace.converged);
        assert!(trace.final_max_residual <= 1e-12);
        assert!(trace.max_vertex_displacement <= 2e-2);
        assert!(max_abs(&residuals(&out)) <= 1e-12);
        for w in trace.cost_history.windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn flexible_rhombus_converges_too() {
        let g = unit_rhombus().map_points(|q| q * 1.01);
        let (out, trace) = refine(&g, &RefineOptions::default()).unwrap();
        assert!(trace.converged);
        assert_eq!(out.edge_count(), 4);
    }

    #[test]
    fn degenerate_input_and_options() {
        let g = build_graph(vec![p(0.0, 0.0), p(1e-4, 0.0)], &[(0, 1)]).unwrap();
        assert!(matches!(
            refine(&g, &RefineOptions::default()),
            Err(RefineError::DegenerateConfiguration { a: 0, b: 1, .. })
        ));
        let bad = RefineOptions {
            damping_factor: 1.0,
            ..Default::default()
        };
        assert!(matches!(refine(&unit_triangle(), &bad), Err(RefineError::InvalidOptions(_))));
    }

    #[test]
    fn unsatisfiable_lengths_do_not_converge() {
        // K4 has no unit-distance realization in the plane.
        let pts = vec![p(0.0, 0.0), p(1.0, 0.0), p(0.5, 0.9), p(0.5, 0.3)];
        let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let g = build_graph(pts, &pairs).unwrap();
        let opts = RefineOptions {
            max_iterations: 30,
            ..Default::default()
        };
        match refine(&g, &opts) {
            Err(RefineError::DidNotConverge { trace }) => {
                assert_eq!(trace.iterations, 30);
                assert!(!trace.converged);
                assert!(trace.final_max_residual > 1e-3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn refinement_is_idempotent() {
        let t = unit_triangle();
        let mut pts = t.vertices().to_vec();
        pts[0] = pts[0] + p(0.01, 0.0);
        let (once, _) = refine(&t.with_vertices(pts), &RefineOptions::default()).unwrap();
        let (twice, trace) = refine(&once, &RefineOptions::default()).unwrap();
        assert!(trace.max_vertex_displacement <= 1e-10);
        assert_eq!(once, twice);
    }
}
