//! Deciding when two realized graphs are the same example.
//!
//! Two frameworks are the same example when some vertex bijection preserves
//! adjacency and a rotation, translation, and optional reflection carries one
//! vertex set onto the other. The search enumerates adjacency-preserving
//! bijections by backtracking, prunes with distance invariants, and checks
//! each complete bijection with a closed-form best-fit isometry.

use std::collections::HashMap;
use std::ops::ControlFlow;

use serde::Serialize;
use thiserror::Error;

use crate::model::{degree_sequence, Graph, Point2};

/// Search nodes allowed before giving up.
pub const NODE_BUDGET: u64 = 10_000_000;

/// Default per-vertex alignment tolerance.
pub const DEFAULT_CONGRUENCE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CongruenceError {
    #[error("isomorphism search exceeded {0} nodes")]
    Timeout(u64),
}

/// Cheap isometry invariant; equal fingerprints are necessary for
/// congruence.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub degrees: Vec<usize>,
    /// All pairwise distances in millionths, sorted.
    pub distances: Vec<i64>,
}

pub fn fingerprint(g: &Graph) -> Fingerprint {
    let mut degrees = degree_sequence(g);
    degrees.sort_unstable();
    let pts = g.vertices();
    let mut distances = Vec::with_capacity(pts.len() * pts.len().saturating_sub(1) / 2);
    for (i, &p) in pts.iter().enumerate() {
        for &q in &pts[i + 1..] {
            distances.push((p.distance(q) * 1e6).round() as i64);
        }
    }
    distances.sort_unstable();
    Fingerprint {
        vertex_count: g.vertex_count(),
        edge_count: g.edge_count(),
        degrees,
        distances,
    }
}

/// A plane isometry `x -> R(angle) S x + translation`, where `S` mirrors
/// across the x-axis when `reflection` is set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Isometry {
    pub rotation: f64,
    pub translation: (f64, f64),
    pub reflection: bool,
}

impl Isometry {
    pub const IDENTITY: Isometry = Isometry {
        rotation: 0.0,
        translation: (0.0, 0.0),
        reflection: false,
    };

    #[inline]
    fn linear(&self, p: Point2) -> Point2 {
        let p = if self.reflection { Point2::new(p.x, -p.y) } else { p };
        let (s, c) = self.rotation.sin_cos();
        Point2::new(c * p.x - s * p.y, s * p.x + c * p.y)
    }

    pub fn apply(&self, p: Point2) -> Point2 {
        self.linear(p) + Point2::new(self.translation.0, self.translation.1)
    }

    pub fn apply_to(&self, g: &Graph) -> Graph {
        g.map_points(|p| self.apply(p))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CongruenceResult {
    pub congruent: bool,
    /// `vertex_mapping[u]` is the vertex of the second graph matched to `u`.
    pub vertex_mapping: Option<Vec<usize>>,
    /// Carries the first graph onto the second.
    pub isometry: Option<Isometry>,
    /// Best error found; infinite when the graphs are not isomorphic.
    pub max_alignment_error: f64,
}

/// Backtracking matcher over adjacency-preserving bijections.
struct Matcher<'g> {
    adj_a: Vec<Vec<usize>>,
    adj_b: Vec<Vec<usize>>,
    /// Sorted neighbour degrees, per vertex.
    signature_a: Vec<Vec<usize>>,
    signature_b: Vec<Vec<usize>>,
    order: Vec<usize>,
    map: Vec<usize>,
    used: Vec<bool>,
    nodes: u64,
    b: &'g Graph,
}

const UNMAPPED: usize = usize::MAX;

fn neighbour_signatures(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    adj.iter()
        .map(|ns| {
            let mut s: Vec<usize> = ns.iter().map(|&w| adj[w].len()).collect();
            s.sort_unstable();
            s
        })
        .collect()
}

/// Lowest-index vertex first, then repeatedly the lowest-index vertex
/// adjacent to one already placed.
fn search_order(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut placed = vec![false; n];
    let mut frontier = std::collections::BTreeSet::new();
    let mut order = Vec::with_capacity(n);
    for root in 0..n {
        if placed[root] {
            continue;
        }
        frontier.insert(root);
        while let Some(u) = frontier.pop_first() {
            if placed[u] {
                continue;
            }
            placed[u] = true;
            order.push(u);
            frontier.extend(adj[u].iter().copied().filter(|&w| !placed[w]));
        }
    }
    order
}

impl<'g> Matcher<'g> {
    fn new(a: &'g Graph, b: &'g Graph) -> Self {
        let adj_a = a.adjacency();
        let adj_b = b.adjacency();
        Self {
            signature_a: neighbour_signatures(&adj_a),
            signature_b: neighbour_signatures(&adj_b),
            order: search_order(&adj_a),
            map: vec![UNMAPPED; a.vertex_count()],
            used: vec![false; b.vertex_count()],
            nodes: 0,
            adj_a,
            adj_b,
            b,
        }
    }

    fn feasible(&self, u: usize, v: usize) -> bool {
        if self.used[v]
            || self.adj_a[u].len() != self.adj_b[v].len()
            || self.signature_a[u] != self.signature_b[v]
        {
            return false;
        }
        let mut mapped_neighbours = 0;
        for &w in &self.adj_a[u] {
            let image = self.map[w];
            if image != UNMAPPED {
                if self.adj_b[v].binary_search(&image).is_err() {
                    return false;
                }
                mapped_neighbours += 1;
            }
        }
        let used_neighbours = self.adj_b[v].iter().filter(|&&x| self.used[x]).count();
        mapped_neighbours == used_neighbours
    }

    fn run<F, P>(&mut self, depth: usize, prune: &P, visit: &mut F) -> Result<ControlFlow<()>, CongruenceError>
    where
        F: FnMut(&[usize]) -> ControlFlow<()>,
        P: Fn(&Self, usize, usize) -> bool,
    {
        if depth == self.order.len() {
            return Ok(visit(&self.map));
        }
        let u = self.order[depth];
        for v in 0..self.b.vertex_count() {
            if !self.feasible(u, v) || !prune(self, u, v) {
                continue;
            }
            self.nodes += 1;
            if self.nodes > NODE_BUDGET {
                return Err(CongruenceError::Timeout(NODE_BUDGET));
            }
            self.map[u] = v;
            self.used[v] = true;
            let flow = self.run(depth + 1, prune, visit)?;
            self.map[u] = UNMAPPED;
            self.used[v] = false;
            if flow.is_break() {
                return Ok(flow);
            }
        }
        Ok(ControlFlow::Continue(()))
    }
}

fn counts_match(a: &Graph, b: &Graph) -> bool {
    if a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    let (mut da, mut db) = (degree_sequence(a), degree_sequence(b));
    da.sort_unstable();
    db.sort_unstable();
    da == db
}

/// Finds a vertex bijection preserving adjacency, if any.
pub fn is_isomorphic(a: &Graph, b: &Graph) -> Result<Option<Vec<usize>>, CongruenceError> {
    if !counts_match(a, b) {
        return Ok(None);
    }
    let mut found = None;
    let mut matcher = Matcher::new(a, b);
    let _ = matcher.run(0, &|_, _, _| true, &mut |map| {
        found = Some(map.to_vec());
        ControlFlow::Break(())
    })?;
    Ok(found)
}

/// Best-fit isometry carrying `from[i]` onto `to[i]`, trying both
/// orientations. Returns the isometry and its maximum point error.
pub fn best_fit_isometry(from: &[Point2], to: &[Point2]) -> (Isometry, f64) {
    assert_eq!(from.len(), to.len());
    let centroid = |pts: &[Point2]| {
        let n = pts.len().max(1) as f64;
        pts.iter().fold(Point2::default(), |acc, &p| acc + p) * (1.0 / n)
    };
    let (ca, cb) = (centroid(from), centroid(to));
    let fit = |reflection: bool| {
        let flip = |p: Point2| if reflection { Point2::new(p.x, -p.y) } else { p };
        let (mut dot, mut cross) = (0.0, 0.0);
        for (&p, &q) in from.iter().zip(to) {
            let (p, q) = (flip(p - ca), q - cb);
            dot += p.dot(q);
            cross += p.cross(q);
        }
        let rotation = cross.atan2(dot);
        let mut iso = Isometry {
            rotation,
            translation: (0.0, 0.0),
            reflection,
        };
        let error = from
            .iter()
            .zip(to)
            .map(|(&p, &q)| iso.linear(p - ca).distance(q - cb))
            .fold(0.0, f64::max);
        let t = cb - iso.linear(ca);
        iso.translation = (t.x, t.y);
        (iso, error)
    };
    let direct = fit(false);
    let mirrored = fit(true);
    if mirrored.1 < direct.1 {
        mirrored
    } else {
        direct
    }
}

/// Searches for an isomorphism admitting an isometry with every vertex
/// within `tol` of its image.
pub fn is_congruent(a: &Graph, b: &Graph, tol: f64) -> Result<CongruenceResult, CongruenceError> {
    let mut best = CongruenceResult {
        congruent: false,
        vertex_mapping: None,
        isometry: None,
        max_alignment_error: f64::INFINITY,
    };
    if !counts_match(a, b) {
        return Ok(best);
    }
    // An isometry within tol moves centroid distances and pairwise
    // distances by at most 2 tol.
    let slack = 2.0 * tol + 1e-12;
    let (ca, cb) = (a.centroid(), b.centroid());
    let radius_a: Vec<f64> = a.vertices().iter().map(|p| p.distance(ca)).collect();
    let radius_b: Vec<f64> = b.vertices().iter().map(|p| p.distance(cb)).collect();
    let (pa, pb) = (a.vertices(), b.vertices());

    let prune = |m: &Matcher<'_>, u: usize, v: usize| {
        if (radius_a[u] - radius_b[v]).abs() > slack {
            return false;
        }
        // Anchor on the first few placed vertices.
        m.order
            .iter()
            .take_while(|&&w| m.map[w] != UNMAPPED)
            .take(3)
            .all(|&w| (pa[u].distance(pa[w]) - pb[v].distance(pb[m.map[w]])).abs() <= slack)
    };
    let mut visit = |map: &[usize]| {
        let image: Vec<Point2> = map.iter().map(|&v| pb[v]).collect();
        let (iso, error) = best_fit_isometry(pa, &image);
        if error < best.max_alignment_error {
            best.max_alignment_error = error;
            best.vertex_mapping = Some(map.to_vec());
            best.isometry = Some(iso);
        }
        if error <= tol {
            best.congruent = true;
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    };
    let mut matcher = Matcher::new(a, b);
    let _ = matcher.run(0, &prune, &mut visit)?;
    if !best.congruent {
        best.vertex_mapping = None;
        best.isometry = None;
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassMember {
    pub id: String,
    /// Carries the representative onto this member.
    pub isometry: Isometry,
    pub max_alignment_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceClass {
    pub representative: String,
    pub members: Vec<ClassMember>,
}

/// Groups graphs into congruence classes.
///
/// Items are processed in ascending id order, so the representative of each
/// class is its smallest id and the partition does not depend on the order
/// of the input. Only graphs with equal fingerprints are compared.
pub fn dedup(items: &[(&str, &Graph)], tol: f64) -> Result<Vec<EquivalenceClass>, CongruenceError> {
    let mut sorted: Vec<(&str, &Graph)> = items.to_vec();
    sorted.sort_by(|x, y| x.0.cmp(y.0));

    let mut classes: Vec<(EquivalenceClass, &Graph)> = Vec::new();
    let mut buckets: HashMap<Fingerprint, Vec<usize>> = HashMap::new();
    for (id, g) in sorted {
        let bucket = buckets.entry(fingerprint(g)).or_default();
        let mut placed = false;
        for &k in bucket.iter() {
            let result = is_congruent(classes[k].1, g, tol)?;
            if result.congruent {
                classes[k].0.members.push(ClassMember {
                    id: id.to_owned(),
                    isometry: result.isometry.expect("congruent result has an isometry"),
                    max_alignment_error: result.max_alignment_error,
                });
                placed = true;
                break;
            }
        }
        if !placed {
            bucket.push(classes.len());
            classes.push((
                EquivalenceClass {
                    representative: id.to_owned(),
                    members: vec![ClassMember {
                        id: id.to_owned(),
                        isometry: Isometry::IDENTITY,
                        max_alignment_error: 0.0,
                    }],
                },
                g,
            ));
        }
    }
    Ok(classes.into_iter().map(|(c, _)| c).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_graph;
    use crate::model::fixtures::*;
    use proptest::prelude::*;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn mirror(g: &Graph) -> Graph {
        g.map_points(|q| p(-q.x + 3.0, q.y - 1.0))
    }

    fn path3() -> Graph {
        build_graph(vec![p(0.0, 0.0), p(1.0, 0.0), p(1.5, 0.8)], &[(0, 1), (1, 2)]).unwrap()
    }

    /// Every permutation of 0..n, lexicographic.
    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for rest in permutations(n - 1) {
            for pos in 0..=rest.len() {
                let mut p = rest.clone();
                p.insert(pos, n - 1);
                out.push(p);
            }
        }
        out
    }

    fn preserves_adjacency(a: &Graph, b: &Graph, map: &[usize]) -> bool {
        let eb: std::collections::HashSet<_> = b.edges().iter().copied().collect();
        a.edge_count() == b.edge_count()
            && a.edges().iter().all(|e| eb.contains(&crate::model::Edge::new(map[e.a], map[e.b])))
    }

    #[test]
    fn mirrored_triangle_fingerprint() {
        let t = unit_triangle();
        assert_eq!(fingerprint(&t), fingerprint(&mirror(&t)));
        let rot = t.map_points(|q| p(-q.y, q.x));
        assert_eq!(fingerprint(&t), fingerprint(&rot));
    }

    #[test]
    fn relabeled_triangle_is_isomorphic() {
        let t = unit_triangle();
        let r = t.permuted(&[1, 2, 0]);
        let map = is_isomorphic(&t, &r).unwrap().unwrap();
        assert!(preserves_adjacency(&t, &r, &map));
        assert_eq!(is_isomorphic(&t, &path3()).unwrap(), None);
    }

    #[test]
    fn self_congruence_is_exact() {
        let g = double_triangle();
        let r = is_congruent(&g, &g, DEFAULT_CONGRUENCE_TOLERANCE).unwrap();
        assert!(r.congruent);
        assert_eq!(r.vertex_mapping.unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(r.max_alignment_error, 0.0);
        let iso = r.isometry.unwrap();
        assert_eq!(iso.rotation, 0.0);
        assert!(!iso.reflection);
    }

    #[test]
    fn mirrored_translated_copy_is_congruent() {
        let g = double_triangle();
        let r = is_congruent(&g, &mirror(&g), DEFAULT_CONGRUENCE_TOLERANCE).unwrap();
        assert!(r.congruent);
        assert!(r.isometry.unwrap().reflection);
        assert!(r.max_alignment_error < 1e-12);
    }

    #[test]
    fn flexed_rhombus_is_not_congruent() {
        let square = unit_rhombus();
        let s = 0.5f64;
        let c = (1.0 - s * s).sqrt();
        let leaning = build_graph(
            vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0 + s, c), p(s, c)],
            &[(0, 1), (1, 2), (2, 3), (0, 3)],
        )
        .unwrap();
        assert!(is_isomorphic(&square, &leaning).unwrap().is_some());
        let r = is_congruent(&square, &leaning, DEFAULT_CONGRUENCE_TOLERANCE).unwrap();
        assert!(!r.congruent);
        assert!(r.vertex_mapping.is_none());
        assert_ne!(fingerprint(&square), fingerprint(&leaning));
    }

    #[test]
    fn dedup_groups_mirror_copies() {
        let g = double_triangle();
        let m = mirror(&g);
        let h = unit_rhombus();
        let classes = dedup(&[("b", &m), ("c", &h), ("a", &g)], DEFAULT_CONGRUENCE_TOLERANCE).unwrap();
        assert_eq!(classes.len(), 2);
        assert_eq!(classes[0].representative, "a");
        assert_eq!(classes[0].members.len(), 2);
        assert_eq!(classes[0].members[1].id, "b");
        assert!(dedup(&[], DEFAULT_CONGRUENCE_TOLERANCE).unwrap().is_empty());
    }

    #[test]
    fn isomorphism_agrees_with_brute_force() {
        use rand::{rngs::StdRng, Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..60 {
            let n = rng.gen_range(2..7);
            let pts: Vec<_> = (0..n).map(|i| p(i as f64, 0.0)).collect();
            let edges = |rng: &mut StdRng| -> Vec<(usize, usize)> {
                (0..n)
                    .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                    .filter(|_| rng.gen_bool(0.4))
                    .collect()
            };
            let a = build_graph(pts.clone(), &edges(&mut rng)).unwrap();
            let b = build_graph(pts, &edges(&mut rng)).unwrap();
            let brute = permutations(n).into_iter().any(|perm| preserves_adjacency(&a, &b, &perm));
            let found = is_isomorphic(&a, &b).unwrap();
            assert_eq!(found.is_some(), brute);
            if let Some(map) = found {
                assert!(preserves_adjacency(&a, &b, &map));
            }
        }
    }

    proptest! {
        #[test]
        fn recovers_generated_isometry(angle in -3.2f64..3.2, tx in -5.0f64..5.0, ty in -5.0f64..5.0, reflection: bool) {
            let iso = Isometry { rotation: angle, translation: (tx, ty), reflection };
            let g = double_triangle();
            let copy = iso.apply_to(&g);
            let (found, error) = best_fit_isometry(g.vertices(), copy.vertices());
            prop_assert!(error <= 1e-12);
            prop_assert_eq!(found.reflection, reflection);
            let r = is_congruent(&g, &copy, DEFAULT_CONGRUENCE_TOLERANCE).unwrap();
            prop_assert!(r.congruent);
            prop_assert!(r.max_alignment_error <= 1e-12);
            let back = is_congruent(&copy, &g, DEFAULT_CONGRUENCE_TOLERANCE).unwrap();
            prop_assert!(back.congruent);
        }
    }
}
