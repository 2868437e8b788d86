//! Finite metric spaces with a directed graph and an `A`/`B` side labelling.
//!
//! Points are addressed by dense [`PointId`] indices; the user-facing string
//! labels are kept alongside for I/O. Distances are stored as a full
//! row-major table and the edge set as a dense adjacency bitmap, so every
//! predicate below is an exhaustive scan.
//!
//! Two predicates are defined in the literature through sequences. On a
//! finite point set they reduce to the checks implemented here:
//!
//! * property UC: a sequence of distances converging to `d(A, B)` is
//!   eventually equal to it, so the condition becomes "two points of `A` at
//!   distance `d(A, B)` from the same point of `B` coincide";
//! * property (*): every convergent sequence is eventually constant, and the
//!   checkable consequence is that the edge set restricted to the scope is a
//!   quasi-order (transitive, loops being present anyway).

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Verdict;

pub type PointId = usize;

/// Relative tolerance for triangle-inequality validation of distance tables.
pub const TOL_METRIC: f64 = 1e-9;
/// Absolute tolerance used to decide which pairs realise `d(A, B)`.
pub const TOL_TIE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricGraphError {
    #[error("side {0} is empty")]
    EmptySide(char),
    #[error("unknown point `{0}`")]
    UnknownPoint(String),
    #[error("point id {0} out of range")]
    PointOutOfRange(PointId),
    #[error("duplicate point id `{0}`")]
    DuplicatePoint(String),
    #[error("trivial loop ({0}, {0}) missing from the edge set")]
    MissingLoop(String),
    #[error("distance table has wrong shape: expected {expected}x{expected}")]
    TableShape { expected: usize },
    #[error("distance d({0}, {1}) is negative or not finite")]
    BadDistance(String, String),
    #[error("d({0}, {0}) is not zero")]
    NonzeroDiagonal(String),
    #[error("distance table not symmetric at ({0}, {1})")]
    NotSymmetric(String, String),
    #[error("triangle inequality fails for ({0}, {1}, {2})")]
    TriangleViolation(String, String, String),
    #[error("point `{0}` has {1} coordinates, expected {2}")]
    CoordinateDimension(String, usize, usize),
    #[error("point `{0}` has no coordinates but the metric needs them")]
    MissingCoordinates(String),
}

/// Which of the two subsets a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
    /// Member of `A ∩ B`.
    #[serde(rename = "AB", alias = "both")]
    Both,
}

impl Side {
    pub fn in_a(self) -> bool {
        matches!(self, Side::A | Side::Both)
    }

    pub fn in_b(self) -> bool {
        matches!(self, Side::B | Side::Both)
    }
}

/// Coordinate metrics that can materialise a distance table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordMetric {
    L1,
    L2,
    Sup,
}

impl CoordMetric {
    pub fn distance(self, x: &[f64], y: &[f64]) -> f64 {
        let diffs = x.iter().zip(y).map(|(a, b)| (a - b).abs());
        match self {
            CoordMetric::L1 => diffs.sum(),
            CoordMetric::L2 => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            CoordMetric::Sup => diffs.fold(0.0, f64::max),
        }
    }
}

/// Scope of an edge-set predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    A,
    B,
    Union,
}

impl Scope {
    fn contains(self, side: Side) -> bool {
        match self {
            Scope::A => side.in_a(),
            Scope::B => side.in_b(),
            Scope::Union => true,
        }
    }
}

/// A finite metric space with a directed graph: the triple `(X, d, G)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricGraph {
    labels: Vec<String>,
    sides: Vec<Side>,
    coords: Vec<Option<Vec<f64>>>,
    dist: Vec<f64>,
    adj: Vec<bool>,
    index: HashMap<String, PointId>,
}

/// Incremental constructor for [`FiniteMetricGraph`].
#[derive(Debug, Default, Clone)]
pub struct SpaceBuilder {
    labels: Vec<String>,
    sides: Vec<Side>,
    coords: Vec<Option<Vec<f64>>>,
    edges: Vec<(PointId, PointId)>,
}

impl SpaceBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn add_point(&mut self, label: impl Into<String>, side: Side) -> PointId {
        self.labels.push(label.into());
        self.sides.push(side);
        self.coords.push(None);
        self.labels.len() - 1
    }

    pub fn add_point_at(&mut self, label: impl Into<String>, side: Side, coords: Vec<f64>) -> PointId {
        let id = self.add_point(label, side);
        self.coords[id] = Some(coords);
        id
    }

    pub fn add_edge(&mut self, from: PointId, to: PointId) {
        self.edges.push((from, to));
    }

    /// Materialises distances from coordinates. Coordinate metrics are
    /// metrics by construction, so the triangle inequality is not re-checked.
    pub fn build_with_metric(
        self,
        metric: CoordMetric,
        auto_loops: bool,
    ) -> Result<FiniteMetricGraph, MetricGraphError> {
        let n = self.labels.len();
        let dim = match self.coords.first() {
            Some(Some(c)) => c.len(),
            Some(None) => return Err(MetricGraphError::MissingCoordinates(self.labels[0].clone())),
            None => 0,
        };
        for (label, c) in self.labels.iter().zip(&self.coords) {
            match c {
                None => return Err(MetricGraphError::MissingCoordinates(label.clone())),
                Some(c) if c.len() != dim => {
                    return Err(MetricGraphError::CoordinateDimension(label.clone(), c.len(), dim))
                }
                Some(c) if c.iter().any(|v| !v.is_finite()) => {
                    return Err(MetricGraphError::BadDistance(label.clone(), label.clone()))
                }
                _ => {}
            }
        }
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = metric.distance(
                    self.coords[i].as_deref().unwrap_or_default(),
                    self.coords[j].as_deref().unwrap_or_default(),
                );
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        self.finish(dist, auto_loops)
    }

    /// Uses an explicit distance table, validated as a metric up to
    /// [`TOL_METRIC`].
    pub fn build_with_table(
        self,
        table: Vec<Vec<f64>>,
        auto_loops: bool,
    ) -> Result<FiniteMetricGraph, MetricGraphError> {
        let n = self.labels.len();
        if table.len() != n || table.iter().any(|row| row.len() != n) {
            return Err(MetricGraphError::TableShape { expected: n });
        }
        let dist: Vec<f64> = table.into_iter().flatten().collect();
        validate_metric(&self.labels, &dist)?;
        self.finish(dist, auto_loops)
    }

    fn finish(self, dist: Vec<f64>, auto_loops: bool) -> Result<FiniteMetricGraph, MetricGraphError> {
        let n = self.labels.len();
        let mut index = HashMap::with_capacity(n);
        for (i, label) in self.labels.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(MetricGraphError::DuplicatePoint(label.clone()));
            }
        }
        let mut adj = vec![false; n * n];
        for &(u, v) in &self.edges {
            if u >= n || v >= n {
                return Err(MetricGraphError::PointOutOfRange(u.max(v)));
            }
            adj[u * n + v] = true;
        }
        for i in 0..n {
            if auto_loops {
                adj[i * n + i] = true;
            } else if !adj[i * n + i] {
                return Err(MetricGraphError::MissingLoop(self.labels[i].clone()));
            }
        }
        Ok(FiniteMetricGraph {
            labels: self.labels,
            sides: self.sides,
            coords: self.coords,
            dist,
            adj,
            index,
        })
    }
}

fn validate_metric(labels: &[String], dist: &[f64]) -> Result<(), MetricGraphError> {
    let n = labels.len();
    let d = |i: usize, j: usize| dist[i * n + j];
    for i in 0..n {
        if d(i, i) != 0.0 {
            return Err(MetricGraphError::NonzeroDiagonal(labels[i].clone()));
        }
        for j in 0..n {
            let v = d(i, j);
            if !v.is_finite() || v < 0.0 {
                return Err(MetricGraphError::BadDistance(labels[i].clone(), labels[j].clone()));
            }
            if v != d(j, i) {
                return Err(MetricGraphError::NotSymmetric(labels[i].clone(), labels[j].clone()));
            }
        }
    }
    for i in 0..n {
        for k in (i + 1)..n {
            let direct = d(i, k);
            let slack = TOL_METRIC * direct.max(1.0);
            for j in 0..n {
                if direct > d(i, j) + d(j, k) + slack {
                    return Err(MetricGraphError::TriangleViolation(
                        labels[i].clone(),
                        labels[j].clone(),
                        labels[k].clone(),
                    ));
                }
            }
        }
    }
    Ok(())
}

impl FiniteMetricGraph {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn dist(&self, x: PointId, y: PointId) -> f64 {
        self.dist[x * self.len() + y]
    }

    #[inline]
    pub fn has_edge(&self, x: PointId, y: PointId) -> bool {
        self.adj[x * self.len() + y]
    }

    pub fn side(&self, x: PointId) -> Side {
        self.sides[x]
    }

    pub fn label(&self, x: PointId) -> &str {
        &self.labels[x]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn coords(&self, x: PointId) -> Option<&[f64]> {
        self.coords[x].as_deref()
    }

    pub fn id_of(&self, label: &str) -> Result<PointId, MetricGraphError> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| MetricGraphError::UnknownPoint(label.to_string()))
    }

    pub fn check_id(&self, x: PointId) -> Result<(), MetricGraphError> {
        if x < self.len() {
            Ok(())
        } else {
            Err(MetricGraphError::PointOutOfRange(x))
        }
    }

    /// Points of `A` (including `A ∩ B`) in id order.
    pub fn a_points(&self) -> Vec<PointId> {
        (0..self.len()).filter(|&i| self.sides[i].in_a()).collect()
    }

    /// Points of `B` (including `A ∩ B`) in id order.
    pub fn b_points(&self) -> Vec<PointId> {
        (0..self.len()).filter(|&i| self.sides[i].in_b()).collect()
    }

    /// All edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (PointId, PointId)> + '_ {
        let n = self.len();
        (0..n * n).filter(|&k| self.adj[k]).map(move |k| (k / n, k % n))
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().filter(|&&e| e).count()
    }

    /// Same space with points reordered: point `perm[i]` of `self` becomes
    /// point `i` of the result.
    pub fn permuted(&self, perm: &[PointId]) -> FiniteMetricGraph {
        let n = self.len();
        assert_eq!(perm.len(), n, "permutation length mismatch");
        let mut dist = vec![0.0; n * n];
        let mut adj = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = self.dist(perm[i], perm[j]);
                adj[i * n + j] = self.has_edge(perm[i], perm[j]);
            }
        }
        let labels: Vec<String> = perm.iter().map(|&p| self.labels[p].clone()).collect();
        let index = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        FiniteMetricGraph {
            sides: perm.iter().map(|&p| self.sides[p]).collect(),
            coords: perm.iter().map(|&p| self.coords[p].clone()).collect(),
            labels,
            dist,
            adj,
            index,
        }
    }

    /// Removes an edge. Loops cannot be removed.
    pub fn without_edge(&self, x: PointId, y: PointId) -> FiniteMetricGraph {
        assert_ne!(x, y, "trivial loops are part of every metric graph");
        let mut out = self.clone();
        let n = out.len();
        out.adj[x * n + y] = false;
        out
    }

    pub fn with_edge(&self, x: PointId, y: PointId) -> FiniteMetricGraph {
        let mut out = self.clone();
        let n = out.len();
        out.adj[x * n + y] = true;
        out
    }

    /// The raw distance table, row-major.
    pub fn distance_table(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        (0..n).map(|i| self.dist[i * n..(i + 1) * n].to_vec()).collect()
    }
}

/// `d(A, B)` together with the proximal sets `A0`, `B0` and the parallel
/// pairs realising it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairGeometry {
    pub d_ab: f64,
    pub a0: BTreeSet<PointId>,
    pub b0: BTreeSet<PointId>,
    pub parallel_pairs: BTreeSet<(PointId, PointId)>,
}

impl PairGeometry {
    /// Whether `value` equals `d(A, B)` up to [`TOL_TIE`].
    pub fn is_proximal_distance(&self, value: f64) -> bool {
        (value - self.d_ab).abs() <= TOL_TIE
    }
}

pub fn pair_distance(space: &FiniteMetricGraph) -> Result<PairGeometry, MetricGraphError> {
    let a = space.a_points();
    let b = space.b_points();
    if a.is_empty() {
        return Err(MetricGraphError::EmptySide('A'));
    }
    if b.is_empty() {
        return Err(MetricGraphError::EmptySide('B'));
    }
    let d_ab = a
        .iter()
        .flat_map(|&x| b.iter().map(move |&y| space.dist(x, y)))
        .fold(f64::INFINITY, f64::min);
    let mut geom = PairGeometry {
        d_ab,
        a0: BTreeSet::new(),
        b0: BTreeSet::new(),
        parallel_pairs: BTreeSet::new(),
    };
    for &x in &a {
        for &y in &b {
            if space.dist(x, y) - d_ab <= TOL_TIE {
                geom.a0.insert(x);
                geom.b0.insert(y);
                geom.parallel_pairs.insert((x, y));
            }
        }
    }
    Ok(geom)
}

/// A point whose set of proximal partners on the other side is not a
/// singleton.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartnerWitness {
    pub point: PointId,
    pub partners: Vec<PointId>,
}

/// Every point of `A` has exactly one partner in `B` at distance `d(A, B)`,
/// and vice versa.
pub fn is_sharp_proximal(space: &FiniteMetricGraph, geom: &PairGeometry) -> Verdict<PartnerWitness> {
    let a = space.a_points();
    let b = space.b_points();
    let partners = |x: PointId, other: &[PointId]| -> Vec<PointId> {
        other
            .iter()
            .copied()
            .filter(|&y| geom.is_proximal_distance(space.dist(x, y)))
            .collect()
    };
    let witness = a
        .iter()
        .map(|&x| (x, partners(x, &b)))
        .chain(b.iter().map(|&y| (y, partners(y, &a))))
        .find(|(_, p)| p.len() != 1)
        .map(|(point, partners)| PartnerWitness { point, partners });
    Verdict::from_witness(witness)
}

/// Every parallel pair `(a, b)` is an edge.
pub fn is_g_chebyshev(space: &FiniteMetricGraph, geom: &PairGeometry) -> Verdict<(PointId, PointId)> {
    Verdict::from_witness(
        geom.parallel_pairs
            .iter()
            .copied()
            .find(|&(x, y)| !space.has_edge(x, y)),
    )
}

/// `(x, u, y)` with `x ≠ u` in `A`, `y` in `B`, both at distance `d(A, B)`
/// from `y`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UcWitness {
    pub x: PointId,
    pub u: PointId,
    pub y: PointId,
}

/// Finite form of property UC.
pub fn has_property_uc(space: &FiniteMetricGraph, geom: &PairGeometry) -> Verdict<UcWitness> {
    for &y in &space.b_points() {
        let near: Vec<PointId> = space
            .a_points()
            .into_iter()
            .filter(|&x| geom.is_proximal_distance(space.dist(x, y)))
            .collect();
        if near.len() > 1 {
            return Verdict::Fails(UcWitness {
                x: near[0],
                u: near[1],
                y,
            });
        }
    }
    Verdict::Holds
}

/// Component labels of the symmetrised graph `G̃`, numbered by first
/// appearance in id order.
pub fn component_labels(space: &FiniteMetricGraph) -> Vec<usize> {
    component_labels_within(space, |_| true)
}

/// Component labels of `G̃` restricted to the vertices accepted by
/// `include`; excluded vertices get `usize::MAX`.
#[allow(clippy::needless_range_loop)] // ids index several arrays
pub fn component_labels_within(space: &FiniteMetricGraph, include: impl Fn(PointId) -> bool) -> Vec<usize> {
    let n = space.len();
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if label[start] != usize::MAX || !include(start) {
            continue;
        }
        label[start] = next;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if label[v] == usize::MAX
                    && include(v)
                    && (space.has_edge(u, v) || space.has_edge(v, u))
                {
                    label[v] = next;
                    queue.push_back(v);
                }
            }
        }
        next += 1;
    }
    label
}

/// `[x]_G̃`: every vertex joined to `x` by an undirected path.
pub fn component_of(space: &FiniteMetricGraph, x: PointId) -> Result<BTreeSet<PointId>, MetricGraphError> {
    space.check_id(x)?;
    let labels = component_labels(space);
    Ok((0..space.len()).filter(|&y| labels[y] == labels[x]).collect())
}

/// Whether the subgraph induced on `A` is weakly connected.
pub fn a_is_weakly_connected(space: &FiniteMetricGraph) -> bool {
    let labels = component_labels_within(space, |x| space.side(x).in_a());
    labels
        .iter()
        .filter(|&&l| l != usize::MAX)
        .all(|&l| l == 0)
}

/// Transitivity of the edge set restricted to `scope`; the witness is a
/// chain `x → y → z` without the edge `x → z`.
pub fn check_property_star(space: &FiniteMetricGraph, scope: Scope) -> Verdict<(PointId, PointId, PointId)> {
    let pts: Vec<PointId> = (0..space.len())
        .filter(|&p| scope.contains(space.side(p)))
        .collect();
    for &x in &pts {
        for &y in &pts {
            if x == y || !space.has_edge(x, y) {
                continue;
            }
            for &z in &pts {
                if space.has_edge(y, z) && !space.has_edge(x, z) {
                    return Verdict::Fails((x, y, z));
                }
            }
        }
    }
    Verdict::Holds
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(points: &[(&str, Side, f64)], edges: &[(usize, usize)]) -> FiniteMetricGraph {
        let mut b = SpaceBuilder::new();
        for &(l, s, x) in points {
            b.add_point_at(l, s, vec![x]);
        }
        for &(u, v) in edges {
            b.add_edge(u, v);
        }
        b.build_with_metric(CoordMetric::L1, true).unwrap()
    }

    #[test]
    fn single_shared_point_has_zero_gap() {
        let s = line(&[("p", Side::Both, 0.0)], &[]);
        let g = pair_distance(&s).unwrap();
        assert_eq!(g.d_ab, 0.0);
        assert_eq!(g.a0, BTreeSet::from([0]));
        assert_eq!(g.b0, BTreeSet::from([0]));
    }

    #[test]
    fn empty_side_is_an_error() {
        let s = line(&[("a", Side::A, 0.0)], &[]);
        assert_eq!(pair_distance(&s), Err(MetricGraphError::EmptySide('B')));
    }

    #[test]
    fn forced_tie_breaks_sharp_proximality() {
        let s = line(
            &[("a", Side::A, 0.0), ("b1", Side::B, -1.0), ("b2", Side::B, 1.0)],
            &[],
        );
        let g = pair_distance(&s).unwrap();
        let v = is_sharp_proximal(&s, &g);
        assert_eq!(
            v.witness(),
            Some(&PartnerWitness {
                point: 0,
                partners: vec![1, 2]
            })
        );
    }

    #[test]
    fn removed_parallel_edge_breaks_chebyshev() {
        let s = line(&[("a", Side::A, 0.0), ("b", Side::B, 1.0)], &[(0, 1)]);
        let g = pair_distance(&s).unwrap();
        assert!(is_g_chebyshev(&s, &g).holds());
        let cut = s.without_edge(0, 1);
        assert_eq!(is_g_chebyshev(&cut, &g), Verdict::Fails((0, 1)));
    }

    #[test]
    fn two_a_points_sharing_a_partner_break_uc() {
        let s = line(
            &[("a1", Side::A, -1.0), ("a2", Side::A, 1.0), ("b", Side::B, 0.0)],
            &[],
        );
        let g = pair_distance(&s).unwrap();
        assert_eq!(
            has_property_uc(&s, &g),
            Verdict::Fails(UcWitness { x: 0, u: 1, y: 2 })
        );
    }

    #[test]
    fn chain_without_shortcut_is_not_transitive() {
        let s = line(
            &[("a", Side::A, 0.0), ("b", Side::A, 1.0), ("c", Side::A, 2.0)],
            &[(0, 1), (1, 2)],
        );
        assert_eq!(check_property_star(&s, Scope::A), Verdict::Fails((0, 1, 2)));
        let closed = s.with_edge(0, 2);
        assert!(check_property_star(&closed, Scope::A).holds());
        // the chain lives on A only
        assert!(check_property_star(&s, Scope::B).holds());
    }

    #[test]
    fn components_follow_undirected_paths() {
        let s = line(
            &[
                ("a", Side::A, 0.0),
                ("b", Side::A, 1.0),
                ("c", Side::B, 2.0),
                ("d", Side::B, 3.0),
            ],
            &[(1, 0), (2, 1)],
        );
        assert_eq!(component_of(&s, 0).unwrap(), BTreeSet::from([0, 1, 2]));
        assert_eq!(component_of(&s, 3).unwrap(), BTreeSet::from([3]));
        assert!(component_of(&s, 9).is_err());
        assert!(a_is_weakly_connected(&s));
    }

    #[test]
    fn loader_rejects_missing_loops_and_bad_tables() {
        let mut b = SpaceBuilder::new();
        b.add_point("x", Side::A);
        b.add_point("y", Side::B);
        let err = b
            .clone()
            .build_with_table(vec![vec![0.0, 1.0], vec![1.0, 0.0]], false)
            .unwrap_err();
        assert_eq!(err, MetricGraphError::MissingLoop("x".into()));
        let err = b
            .clone()
            .build_with_table(vec![vec![0.0, 1.0], vec![2.0, 0.0]], true)
            .unwrap_err();
        assert!(matches!(err, MetricGraphError::NotSymmetric(..)));

        let mut b = SpaceBuilder::new();
        for l in ["x", "y", "z"] {
            b.add_point(l, Side::A);
        }
        let err = b
            .build_with_table(
                vec![vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 1.0], vec![3.0, 1.0, 0.0]],
                true,
            )
            .unwrap_err();
        assert!(matches!(err, MetricGraphError::TriangleViolation(..)));
    }
}
