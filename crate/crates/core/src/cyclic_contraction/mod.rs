//! Graph-constrained cyclic `(φ₁, φ₂)`-contractions.
//!
//! A cyclic map `T` on `A ∪ B` is such a contraction when `T²` preserves the
//! edges on `A` and, for every `(x, y) ∈ A × B` with at least one of
//! `(x, y)`, `(x, Ty)`, `(Ty, x)` in the edge set,
//!
//! ```text
//! d(Tx, Ty) ≤ (I − φ₁)(d(x, y)) + (I − φ₂)(m(x, y)) + (φ₁ + φ₂ − I)(d(A, B))
//! ```
//!
//! with `m(x, y) = max{d(x, Tx), d(y, Ty)}`.

mod gauge;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

pub use gauge::{
    check_class, kappa, kappa_total, verify_gauge_classes, GaugeSpec, GaugeWitness, MonotoneClass, KAPPA_SNAP,
};

use crate::metric_graph::{pair_distance, FiniteMetricGraph, MetricGraphError, PairGeometry, PointId};
use crate::par::Execution;
use crate::Verdict;

/// Absolute slack for inequality checks.
pub const TOL_INEQ: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContractionError {
    #[error("argument {0} outside the open interval (0, 1)")]
    OutOfDomain(f64),
    #[error("map is not cyclic: {0} is sent to {1}, which is on the wrong side")]
    NotCyclic(String, String),
    #[error("map has {0} entries, space has {1} points")]
    MapLength(usize, usize),
    #[error("map leaves point `{0}` undefined")]
    Undefined(String),
    #[error("expected x in A and y in B, got ({0}, {1})")]
    SideMismatch(String, String),
    #[error("gauge {} fails its monotonicity class between s = {} and s = {}", .0.gauge, .0.s_lo, .0.s_hi)]
    GaugeClassViolation(GaugeWitness),
    #[error(transparent)]
    Space(#[from] MetricGraphError),
}

/// A total cyclic map `T` with `T(A) ⊆ B` and `T(B) ⊆ A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicMap {
    image: Vec<PointId>,
}

impl CyclicMap {
    pub fn new(space: &FiniteMetricGraph, image: Vec<PointId>) -> Result<Self, ContractionError> {
        if image.len() != space.len() {
            return Err(ContractionError::MapLength(image.len(), space.len()));
        }
        for (x, &tx) in image.iter().enumerate() {
            space.check_id(tx)?;
            let (sx, stx) = (space.side(x), space.side(tx));
            if (sx.in_a() && !stx.in_b()) || (sx.in_b() && !stx.in_a()) {
                return Err(ContractionError::NotCyclic(
                    space.label(x).to_string(),
                    space.label(tx).to_string(),
                ));
            }
        }
        Ok(Self { image })
    }

    /// Builds the map from label pairs; every point must be mapped.
    pub fn from_labels(space: &FiniteMetricGraph, map: &BTreeMap<String, String>) -> Result<Self, ContractionError> {
        let mut image = vec![usize::MAX; space.len()];
        for (from, to) in map {
            image[space.id_of(from)?] = space.id_of(to)?;
        }
        if let Some(x) = image.iter().position(|&t| t == usize::MAX) {
            return Err(ContractionError::Undefined(space.label(x).to_string()));
        }
        Self::new(space, image)
    }

    #[inline]
    pub fn apply(&self, x: PointId) -> PointId {
        self.image[x]
    }

    #[inline]
    pub fn apply_twice(&self, x: PointId) -> PointId {
        self.image[self.image[x]]
    }

    pub fn image(&self) -> &[PointId] {
        &self.image
    }

    pub fn to_labels(&self, space: &FiniteMetricGraph) -> BTreeMap<String, String> {
        self.image
            .iter()
            .enumerate()
            .map(|(x, &t)| (space.label(x).to_string(), space.label(t).to_string()))
            .collect()
    }
}

/// `m(x, y) = max{d(x, Tx), d(y, Ty)}` for `x ∈ A`, `y ∈ B`.
pub fn m_value(space: &FiniteMetricGraph, map: &CyclicMap, x: PointId, y: PointId) -> Result<f64, ContractionError> {
    space.check_id(x)?;
    space.check_id(y)?;
    if !space.side(x).in_a() || !space.side(y).in_b() {
        return Err(ContractionError::SideMismatch(
            space.label(x).to_string(),
            space.label(y).to_string(),
        ));
    }
    Ok(m_unchecked(space, map, x, y))
}

fn m_unchecked(space: &FiniteMetricGraph, map: &CyclicMap, x: PointId, y: PointId) -> f64 {
    space.dist(x, map.apply(x)).max(space.dist(y, map.apply(y)))
}

/// For every edge `(u, v)` inside `A`, `(T²u, T²v)` is an edge.
pub fn verify_t2_preserves_edges(space: &FiniteMetricGraph, map: &CyclicMap) -> Verdict<(PointId, PointId)> {
    Verdict::from_witness(space.edges().find(|&(u, v)| {
        space.side(u).in_a() && space.side(v).in_a() && !space.has_edge(map.apply_twice(u), map.apply_twice(v))
    }))
}

/// Which `(x, y) ∈ A × B` pairs the inequality is checked on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairSelection {
    /// Pairs with `{(x, y), (x, Ty), (Ty, x)} ∩ E ≠ ∅`.
    EdgeEligible,
    /// Every pair, ignoring the graph (a plain cyclic contraction check).
    AllPairs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionOptions {
    pub selection: PairSelection,
    pub tol: f64,
    /// Points whose pairs are skipped, e.g. the cut-off level of a truncated
    /// infinite instance.
    pub exclude: BTreeSet<PointId>,
    pub execution: Execution,
}

impl Default for ContractionOptions {
    fn default() -> Self {
        Self {
            selection: PairSelection::EdgeEligible,
            tol: TOL_INEQ,
            exclude: BTreeSet::new(),
            execution: Execution::default(),
        }
    }
}

impl ContractionOptions {
    pub fn all_pairs() -> Self {
        Self {
            selection: PairSelection::AllPairs,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Inequality,
    /// A required edge is absent (used by the `ψ`-contraction verifier).
    MissingEdge,
}

/// One failed pair: `lhs` is the measured distance, `rhs` its bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub x: PointId,
    pub y: PointId,
    pub lhs: f64,
    pub rhs: f64,
    pub kind: ViolationKind,
}

impl Violation {
    pub fn excess(&self) -> f64 {
        self.lhs - self.rhs
    }
}

/// Result of an inequality sweep. `holds` is true exactly when `violations`
/// is empty. Pairs with `0 < lhs − rhs ≤ tol` are listed separately in
/// `near_violations` and do not count as failures.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionReport {
    pub holds: bool,
    pub checked_pairs: usize,
    pub violations: Vec<Violation>,
    pub near_violations: Vec<Violation>,
    /// First edge inside `A` whose `T²` image is not an edge.
    pub t2_edge_witness: Option<(PointId, PointId)>,
    /// A point of `A0 ∪ B0` mapped outside the proximal sets.
    pub proximal_witness: Option<PointId>,
}

impl ContractionReport {
    pub(crate) fn from_outcomes(outcomes: Vec<PairOutcome>, tol: f64) -> Self {
        let mut checked_pairs = 0;
        let mut violations = Vec::new();
        let mut near_violations = Vec::new();
        for o in outcomes {
            checked_pairs += o.checked;
            for v in o.failures {
                if v.kind == ViolationKind::MissingEdge || v.excess() > tol {
                    violations.push(v);
                } else {
                    near_violations.push(v);
                }
            }
        }
        Self {
            holds: violations.is_empty(),
            checked_pairs,
            violations,
            near_violations,
            t2_edge_witness: None,
            proximal_witness: None,
        }
    }

    /// Inequality holds, `T²` preserves edges on `A`, and `T(A0) ⊆ B0`,
    /// `T(B0) ⊆ A0`.
    pub fn is_contraction(&self) -> bool {
        self.holds && self.t2_edge_witness.is_none() && self.proximal_witness.is_none()
    }

    /// Treats near-violations as failures as well.
    pub fn holds_strictly(&self) -> bool {
        self.holds && self.near_violations.is_empty()
    }
}

#[derive(Debug, Default)]
pub(crate) struct PairOutcome {
    pub checked: usize,
    pub failures: Vec<Violation>,
}

/// The right-hand side of the contraction inequality.
pub fn contraction_bound(phi1: &GaugeSpec, phi2: &GaugeSpec, d_xy: f64, m_xy: f64, d_ab: f64) -> f64 {
    (d_xy - phi1.eval(d_xy)) + (m_xy - phi2.eval(m_xy)) + (phi1.eval(d_ab) + phi2.eval(d_ab) - d_ab)
}

/// Every distance value the inequality can evaluate the gauges at, sorted
/// and deduplicated.
pub fn gauge_sample_grid(space: &FiniteMetricGraph, map: &CyclicMap, d_ab: f64) -> Vec<f64> {
    let mut grid = vec![d_ab];
    for x in space.a_points() {
        for y in space.b_points() {
            grid.push(space.dist(x, y));
        }
    }
    for x in 0..space.len() {
        grid.push(space.dist(x, map.apply(x)));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    grid
}

pub fn verify_g_cyclic_contraction(
    space: &FiniteMetricGraph,
    map: &CyclicMap,
    phi1: &GaugeSpec,
    phi2: &GaugeSpec,
    opts: &ContractionOptions,
) -> Result<ContractionReport, ContractionError> {
    let geom = pair_distance(space)?;
    verify_with_geometry(space, &geom, map, phi1, phi2, opts)
}

/// [`verify_g_cyclic_contraction`] with a precomputed [`PairGeometry`].
pub fn verify_with_geometry(
    space: &FiniteMetricGraph,
    geom: &PairGeometry,
    map: &CyclicMap,
    phi1: &GaugeSpec,
    phi2: &GaugeSpec,
    opts: &ContractionOptions,
) -> Result<ContractionReport, ContractionError> {
    let d_ab = geom.d_ab;
    let grid = gauge_sample_grid(space, map, d_ab);
    if let Verdict::Fails(w) = verify_gauge_classes(phi1, phi2, &grid) {
        return Err(ContractionError::GaugeClassViolation(w));
    }
    let a = space.a_points();
    let b = space.b_points();
    let outcomes = opts.execution.map_slice(&a, |&x| {
        let mut out = PairOutcome::default();
        if opts.exclude.contains(&x) {
            return out;
        }
        for &y in &b {
            if opts.exclude.contains(&y) {
                continue;
            }
            let ty = map.apply(y);
            let eligible = match opts.selection {
                PairSelection::AllPairs => true,
                PairSelection::EdgeEligible => {
                    space.has_edge(x, y) || space.has_edge(x, ty) || space.has_edge(ty, x)
                }
            };
            if !eligible {
                continue;
            }
            out.checked += 1;
            let lhs = space.dist(map.apply(x), ty);
            let rhs = contraction_bound(phi1, phi2, space.dist(x, y), m_unchecked(space, map, x, y), d_ab);
            if lhs > rhs {
                out.failures.push(Violation {
                    x,
                    y,
                    lhs,
                    rhs,
                    kind: ViolationKind::Inequality,
                });
            }
        }
        out
    });
    let mut report = ContractionReport::from_outcomes(outcomes, opts.tol);
    report.t2_edge_witness = verify_t2_preserves_edges(space, map).witness().copied();
    report.proximal_witness = geom
        .a0
        .iter()
        .find(|&&x| !geom.b0.contains(&map.apply(x)))
        .or_else(|| geom.b0.iter().find(|&&y| !geom.a0.contains(&map.apply(y))))
        .copied();
    Ok(report)
}
