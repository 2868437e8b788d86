//! Orbit iteration and best proximity points.
//!
//! A best proximity point of a cyclic map `T` in `A` is an `x ∈ A` with
//! `d(x, Tx) = d(A, B)`. Starting from an admissible seed (a point `x` with
//! `(x, T²x)` an edge) the even orbit `T²ⁿx` of a contraction reaches the
//! best proximity point of the seed's component; on finite instances it does
//! so in finitely many steps, which is what the solver exploits.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::cyclic_contraction::{
    verify_with_geometry, ContractionError, ContractionOptions, ContractionReport, CyclicMap, GaugeSpec,
};
use crate::metric_graph::{
    a_is_weakly_connected, check_property_star, component_labels, component_of, has_property_uc,
    is_sharp_proximal, pair_distance, FiniteMetricGraph, MetricGraphError, PairGeometry, PartnerWitness, PointId,
    Scope, UcWitness,
};
use crate::par::Execution;
use crate::Verdict;

pub const TOL_BPP: f64 = 1e-9;
pub const MAX_ITER: usize = 10_000;

/// A failed standing assumption, with its witness.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "hypothesis", content = "witness", rename_all = "snake_case")]
pub enum Hypothesis {
    PropertyUc(UcWitness),
    PropertyStar((PointId, PointId, PointId)),
    SharpProximal(PartnerWitness),
    /// `(x, T²x)` is not an edge.
    SeedNotAdmissible(PointId),
    Contraction(Box<ContractionReport>),
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hypothesis::PropertyUc(w) => write!(f, "property UC fails at x={}, u={}, y={}", w.x, w.u, w.y),
            Hypothesis::PropertyStar((x, y, z)) => {
                write!(f, "edge transitivity fails: ({x},{y}) and ({y},{z}) are edges, ({x},{z}) is not")
            }
            Hypothesis::SharpProximal(w) => {
                write!(f, "point {} has {} proximal partners", w.point, w.partners.len())
            }
            Hypothesis::SeedNotAdmissible(x) => write!(f, "seed {x} is not in the admissible set"),
            Hypothesis::Contraction(r) => write!(
                f,
                "map is not a contraction ({} violations, t2 edge witness {:?}, proximal witness {:?})",
                r.violations.len(),
                r.t2_edge_witness,
                r.proximal_witness
            ),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BppError {
    #[error("start point `{0}` is not in A")]
    NotInA(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(Hypothesis),
    #[error("no best proximity point after {iterations} even steps (last gap {gap})")]
    NoConvergence { iterations: usize, gap: f64 },
    #[error(transparent)]
    Space(#[from] MetricGraphError),
    #[error(transparent)]
    Contraction(#[from] ContractionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIter,
    CycleDetected,
}

/// The orbit `x₀, Tx₀, T²x₀, ...` with gaps `dₙ = d(xₙ₊₁, xₙ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitTrace {
    pub x0: PointId,
    pub points: Vec<PointId>,
    pub gaps: Vec<f64>,
    pub stop_reason: StopReason,
    /// Whether the last even point is fixed by `T²`.
    pub t2_fixed: bool,
}

impl OrbitTrace {
    /// Largest increase between consecutive gaps (0 for a monotone trace).
    pub fn max_gap_increase(&self) -> f64 {
        self.gaps.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BppResult {
    pub bpp: PointId,
    pub achieved_gap: f64,
    /// Number of `T²` applications.
    pub iterations: usize,
    pub component: BTreeSet<PointId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BppOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Check property UC, transitivity on `A` and seed admissibility before
    /// solving. Switch off for falsification runs.
    pub check_hypotheses: bool,
    pub execution: Execution,
}

impl Default for BppOptions {
    fn default() -> Self {
        Self {
            tol: TOL_BPP,
            max_iter: MAX_ITER,
            check_hypotheses: true,
            execution: Execution::default(),
        }
    }
}

impl BppOptions {
    pub fn unchecked() -> Self {
        Self {
            check_hypotheses: false,
            ..Self::default()
        }
    }
}

/// `X_{T²}^A`: points `x ∈ A` with `(x, T²x)` an edge.
pub fn x_t2_a_set(space: &FiniteMetricGraph, map: &CyclicMap) -> BTreeSet<PointId> {
    space
        .a_points()
        .into_iter()
        .filter(|&x| space.has_edge(x, map.apply_twice(x)))
        .collect()
}

pub fn iterate_orbit(
    space: &FiniteMetricGraph,
    map: &CyclicMap,
    x0: PointId,
    max_iter: usize,
    tol: f64,
) -> Result<OrbitTrace, BppError> {
    let geom = pair_distance(space)?;
    orbit_with_geometry(space, &geom, map, x0, max_iter, tol)
}

fn orbit_with_geometry(
    space: &FiniteMetricGraph,
    geom: &PairGeometry,
    map: &CyclicMap,
    x0: PointId,
    max_iter: usize,
    tol: f64,
) -> Result<OrbitTrace, BppError> {
    require_a(space, x0)?;
    let mut points = vec![x0];
    let mut gaps = Vec::new();
    let mut seen_even = BTreeSet::from([x0]);
    let mut stop_reason = StopReason::MaxIter;
    for n in 0..max_iter {
        let cur = points[n];
        let next = map.apply(cur);
        points.push(next);
        let gap = space.dist(next, cur);
        gaps.push(gap);
        if (gap - geom.d_ab).abs() <= tol {
            stop_reason = StopReason::Converged;
            break;
        }
        // next has even index n + 1 exactly when n is odd
        if n % 2 == 1 && !seen_even.insert(next) {
            stop_reason = StopReason::CycleDetected;
            break;
        }
    }
    let last_even = points[(points.len() - 1) & !1];
    Ok(OrbitTrace {
        x0,
        points,
        gaps,
        stop_reason,
        t2_fixed: map.apply_twice(last_even) == last_even,
    })
}

fn require_a(space: &FiniteMetricGraph, x: PointId) -> Result<(), BppError> {
    space.check_id(x)?;
    if !space.side(x).in_a() {
        return Err(BppError::NotInA(space.label(x).to_string()));
    }
    Ok(())
}

/// Property UC on `(A, B)` and transitivity of the edges inside `A`.
pub fn check_standing_hypotheses(space: &FiniteMetricGraph, geom: &PairGeometry) -> Result<(), BppError> {
    if let Verdict::Fails(w) = has_property_uc(space, geom) {
        return Err(BppError::HypothesisViolated(Hypothesis::PropertyUc(w)));
    }
    if let Verdict::Fails(w) = check_property_star(space, Scope::A) {
        return Err(BppError::HypothesisViolated(Hypothesis::PropertyStar(w)));
    }
    Ok(())
}

/// Follows the even orbit of `x0` until it hits a point at proximal distance
/// from its image.
pub fn solve_bpp(
    space: &FiniteMetricGraph,
    map: &CyclicMap,
    x0: PointId,
    opts: &BppOptions,
) -> Result<BppResult, BppError> {
    require_a(space, x0)?;
    let geom = pair_distance(space)?;
    if opts.check_hypotheses {
        check_standing_hypotheses(space, &geom)?;
        if !space.has_edge(x0, map.apply_twice(x0)) {
            return Err(BppError::HypothesisViolated(Hypothesis::SeedNotAdmissible(x0)));
        }
    }
    let mut x = x0;
    let mut seen = BTreeSet::new();
    let mut iterations = 0;
    loop {
        let gap = space.dist(x, map.apply(x));
        if (gap - geom.d_ab).abs() <= opts.tol {
            return Ok(BppResult {
                bpp: x,
                achieved_gap: gap,
                iterations,
                component: component_of(space, x0)?,
            });
        }
        if iterations >= opts.max_iter || !seen.insert(x) {
            return Err(BppError::NoConvergence { iterations, gap });
        }
        x = map.apply_twice(x);
        iterations += 1;
    }
}

/// Exact scan `{x ∈ A : |d(x, Tx) − d(A, B)| ≤ tol}`.
pub fn enumerate_bpps(space: &FiniteMetricGraph, map: &CyclicMap, tol: f64) -> Result<BTreeSet<PointId>, BppError> {
    let geom = pair_distance(space)?;
    Ok(bpps_with_geometry(space, &geom, map, tol))
}

fn bpps_with_geometry(space: &FiniteMetricGraph, geom: &PairGeometry, map: &CyclicMap, tol: f64) -> BTreeSet<PointId> {
    space
        .a_points()
        .into_iter()
        .filter(|&x| (space.dist(x, map.apply(x)) - geom.d_ab).abs() <= tol)
        .collect()
}

/// Number of classes of the symmetrised graph that contain a point of `A`.
pub fn count_classes_meeting_a(space: &FiniteMetricGraph) -> usize {
    let labels = component_labels(space);
    space.a_points().into_iter().map(|x| labels[x]).collect::<BTreeSet<_>>().len()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CardinalityReport {
    pub bpp_count: usize,
    pub component_count: usize,
    pub equal: bool,
}

pub fn check_cardinality(
    space: &FiniteMetricGraph,
    map: &CyclicMap,
    opts: &BppOptions,
) -> Result<CardinalityReport, BppError> {
    let geom = pair_distance(space)?;
    if opts.check_hypotheses {
        check_standing_hypotheses(space, &geom)?;
    }
    let bpp_count = bpps_with_geometry(space, &geom, map, opts.tol).len();
    let component_count = count_classes_meeting_a(space);
    Ok(CardinalityReport {
        bpp_count,
        component_count,
        equal: bpp_count == component_count,
    })
}

/// The `T²`-cycle the even orbit of `x` ends in, named by its smallest id,
/// and the cycle length.
pub fn even_orbit_terminal(map: &CyclicMap, x: PointId) -> (PointId, usize) {
    let mut first_visit = BTreeMap::new();
    let mut cur = x;
    let mut step = 0usize;
    loop {
        if let Some(&start) = first_visit.get(&cur) {
            let len = step - start;
            let mut smallest = cur;
            let mut y = map.apply_twice(cur);
            while y != cur {
                smallest = smallest.min(y);
                y = map.apply_twice(y);
            }
            return (smallest, len);
        }
        first_visit.insert(cur, step);
        cur = map.apply_twice(cur);
        step += 1;
    }
}

/// Truth values of the three equivalent clauses on one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    /// The graph restricted to `A` is weakly connected.
    pub weakly_connected: bool,
    /// Every even orbit from `A` settles on the same `T²`-fixed point.
    pub orbits_equivalent: bool,
    /// At most one best proximity point in `A`.
    pub at_most_one_bpp: bool,
    pub agree: bool,
    /// On a single map only the forward implications are forced; this flags
    /// a broken one.
    pub falsified: bool,
    pub contraction: ContractionReport,
}

pub fn check_equivalence_theorem(
    space: &FiniteMetricGraph,
    map: &CyclicMap,
    phi1: &GaugeSpec,
    phi2: &GaugeSpec,
    opts: &BppOptions,
) -> Result<EquivalenceReport, BppError> {
    let geom = pair_distance(space)?;
    let contraction = verify_with_geometry(
        space,
        &geom,
        map,
        phi1,
        phi2,
        &ContractionOptions {
            execution: opts.execution,
            ..ContractionOptions::default()
        },
    )?;
    if opts.check_hypotheses {
        if let Verdict::Fails(w) = is_sharp_proximal(space, &geom) {
            return Err(BppError::HypothesisViolated(Hypothesis::SharpProximal(w)));
        }
        check_standing_hypotheses(space, &geom)?;
        if !contraction.is_contraction() {
            return Err(BppError::HypothesisViolated(Hypothesis::Contraction(Box::new(contraction))));
        }
    }
    let a = space.a_points();
    let terminals = opts.execution.map_slice(&a, |&x| even_orbit_terminal(map, x));
    let orbits_equivalent =
        terminals.iter().all(|&(_, len)| len == 1) && terminals.windows(2).all(|w| w[0].0 == w[1].0);
    let weakly_connected = a_is_weakly_connected(space);
    let at_most_one_bpp = bpps_with_geometry(space, &geom, map, opts.tol).len() <= 1;
    Ok(EquivalenceReport {
        weakly_connected,
        orbits_equivalent,
        at_most_one_bpp,
        agree: weakly_connected == orbits_equivalent && orbits_equivalent == at_most_one_bpp,
        falsified: (weakly_connected && !orbits_equivalent) || (orbits_equivalent && !at_most_one_bpp),
        contraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_graph::{CoordMetric, Side, SpaceBuilder};

    /// Heights 1, 1/2, 1/4, 0 on both sides of a unit-width strip, with a
    /// halving map whose last level drops to 0.
    fn halving() -> (FiniteMetricGraph, CyclicMap) {
        let heights = [1.0, 0.5, 0.25, 0.0];
        let mut s = SpaceBuilder::new();
        for (i, h) in heights.iter().enumerate() {
            s.add_point_at(format!("a{i}"), Side::A, vec![0.0, *h]);
        }
        for (i, h) in heights.iter().enumerate() {
            s.add_point_at(format!("b{i}"), Side::B, vec![1.0, *h]);
        }
        for u in 0..8 {
            for v in 0..8 {
                s.add_edge(u, v);
            }
        }
        let s = s.build_with_metric(CoordMetric::L1, false).unwrap();
        let t = CyclicMap::new(&s, vec![5, 6, 7, 7, 1, 2, 3, 3]).unwrap();
        (s, t)
    }

    #[test]
    fn orbit_from_top_reaches_the_floor() {
        let (s, t) = halving();
        let trace = iterate_orbit(&s, &t, 0, 100, 1e-12).unwrap();
        assert_eq!(trace.points, vec![0, 5, 2, 7, 3]);
        assert_eq!(trace.gaps, vec![1.5, 1.25, 1.25, 1.0]);
        assert_eq!(trace.stop_reason, StopReason::Converged);
        assert!(trace.t2_fixed);
        assert_eq!(trace.max_gap_increase(), 0.0);
    }

    #[test]
    fn bpp_is_the_floor_from_every_seed() {
        let (s, t) = halving();
        assert_eq!(enumerate_bpps(&s, &t, 1e-12).unwrap(), BTreeSet::from([3]));
        for x in 0..4 {
            let r = solve_bpp(&s, &t, x, &BppOptions::default()).unwrap();
            assert_eq!(r.bpp, 3);
            assert_eq!(r.achieved_gap, 1.0);
        }
        let r = solve_bpp(&s, &t, 3, &BppOptions::default()).unwrap();
        assert_eq!(r.iterations, 0);
        assert!(matches!(solve_bpp(&s, &t, 5, &BppOptions::default()), Err(BppError::NotInA(_))));
    }

    #[test]
    fn cardinality_and_equivalence_on_a_connected_instance() {
        // everything collapses onto the floor pair
        let (s, _) = halving();
        let t = CyclicMap::new(&s, vec![7, 7, 7, 7, 3, 3, 3, 3]).unwrap();
        let c = check_cardinality(&s, &t, &BppOptions::default()).unwrap();
        assert_eq!((c.bpp_count, c.component_count, c.equal), (1, 1, true));
        let e = check_equivalence_theorem(
            &s,
            &t,
            &GaugeSpec::Linear { c: 0.5 },
            &GaugeSpec::AffineShift { c: 0.0 },
            &BppOptions::default(),
        )
        .unwrap();
        assert!(e.weakly_connected && e.orbits_equivalent && e.at_most_one_bpp);
        assert!(e.agree && !e.falsified);
    }

    #[test]
    fn inadmissible_seed_is_reported() {
        let mut s = SpaceBuilder::new();
        s.add_point_at("a0", Side::A, vec![0.0, 0.0]);
        s.add_point_at("a1", Side::A, vec![0.0, 1.0]);
        s.add_point_at("b0", Side::B, vec![1.0, 0.0]);
        let s = s.build_with_metric(CoordMetric::L1, true).unwrap();
        let t = CyclicMap::new(&s, vec![2, 2, 0]).unwrap();
        assert_eq!(x_t2_a_set(&s, &t), BTreeSet::from([0]));
        assert!(matches!(
            solve_bpp(&s, &t, 1, &BppOptions::default()),
            Err(BppError::HypothesisViolated(Hypothesis::SeedNotAdmissible(1)))
        ));
        assert_eq!(solve_bpp(&s, &t, 1, &BppOptions::unchecked()).unwrap().bpp, 0);
    }

    #[test]
    fn two_cycle_is_detected() {
        // a0 -> b2 -> a1 -> b3 -> a0, never at proximal distance
        let mut s = SpaceBuilder::new();
        s.add_point_at("a0", Side::A, vec![0.0, 0.0]);
        s.add_point_at("a1", Side::A, vec![0.0, 1.0]);
        for (i, h) in [0.0, 1.0, 5.0, 6.0].iter().enumerate() {
            s.add_point_at(format!("b{i}"), Side::B, vec![1.0, *h]);
        }
        let s = s.build_with_metric(CoordMetric::L1, true).unwrap();
        let t = CyclicMap::new(&s, vec![4, 5, 0, 1, 1, 0]).unwrap();
        let trace = iterate_orbit(&s, &t, 0, 100, 1e-12).unwrap();
        assert_eq!(trace.stop_reason, StopReason::CycleDetected);
        assert!(!trace.t2_fixed);
        assert_eq!(even_orbit_terminal(&t, 0), (0, 2));
        assert!(matches!(
            solve_bpp(&s, &t, 0, &BppOptions::unchecked()),
            Err(BppError::NoConvergence { .. })
        ));
    }
}
