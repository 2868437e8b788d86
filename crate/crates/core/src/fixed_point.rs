//! Common fixed points of `ψ`-contraction pairs.
//!
//! A pair `T₁: A → B`, `T₂: B → A` is a `ψ`-contraction on the graph when for
//! `i ≠ j` and every `x ∈ A_i` with `(x, T_i x)` an edge, `(T_i x, T_j T_i x)`
//! is an edge and `d(T_i x, T_j T_i x) ≤ ψ(d(x, T_i x)) · d(x, T_i x)`. The
//! alternating orbit then has geometrically shrinking steps, and its limit is
//! a common fixed point in `A ∩ B`.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::bpp_solver::Hypothesis;
use crate::cyclic_contraction::{
    check_class, ContractionReport, CyclicMap, GaugeSpec, GaugeWitness, MonotoneClass, PairOutcome, Violation,
    ViolationKind, TOL_INEQ,
};
use crate::metric_graph::{
    a_is_weakly_connected, check_property_star, pair_distance, FiniteMetricGraph, MetricGraphError, PointId, Scope,
};
use crate::par::Execution;
use crate::Verdict;

pub const TOL_FIXED: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FixedPointError {
    #[error("ψ gauge leaves [0, 1) or decreases between s = {} and s = {}", .0.s_lo, .0.s_hi)]
    GaugeClassViolation(GaugeWitness),
    #[error("ψ value {0} is outside [0, 1)")]
    InvalidPsi(f64),
    #[error("map {map} is not well-sided at `{point}`")]
    BadMap { map: u8, point: String },
    #[error("seed `{0}` is not in A or (x, T1 x) is not an edge")]
    SeedNotEligible(String),
    #[error("no common fixed point after {iterations} steps (last step {gap})")]
    NoConvergence { iterations: usize, gap: f64 },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(Hypothesis),
    #[error(transparent)]
    Space(#[from] MetricGraphError),
}

/// A non-decreasing gauge with values in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct PsiGauge(pub GaugeSpec);

impl PsiGauge {
    pub fn constant(c: f64) -> Self {
        Self(GaugeSpec::Constant { c })
    }

    /// The `ψ` with `t (1 − ψ(t)) = φ(t) − φ(d_ab)` for `t > d_ab`.
    pub fn induced(phi: GaugeSpec, d_ab: f64) -> Self {
        Self(GaugeSpec::Induced {
            phi: Box::new(phi),
            d_ab,
        })
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.0.eval(s)
    }

    /// Checks range and monotonicity on an ascending grid.
    pub fn validate(&self, grid: &[f64]) -> Result<(), FixedPointError> {
        match check_class(&self.0, MonotoneClass::IntoUnitInterval, grid) {
            Some(w) => Err(FixedPointError::GaugeClassViolation(w)),
            None => Ok(()),
        }
    }
}

/// `T₁` on the `A` points and `T₂` on the `B` points. Points on both sides
/// carry both.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairMaps {
    t1: Vec<Option<PointId>>,
    t2: Vec<Option<PointId>>,
}

impl PairMaps {
    pub fn new(
        space: &FiniteMetricGraph,
        t1: Vec<Option<PointId>>,
        t2: Vec<Option<PointId>>,
    ) -> Result<Self, FixedPointError> {
        let bad = |map: u8, x: PointId| FixedPointError::BadMap {
            map,
            point: space.label(x).to_string(),
        };
        if t1.len() != space.len() || t2.len() != space.len() {
            return Err(FixedPointError::BadMap {
                map: if t1.len() != space.len() { 1 } else { 2 },
                point: String::from("<length>"),
            });
        }
        for x in 0..space.len() {
            let side = space.side(x);
            match t1[x] {
                Some(y) if side.in_a() && y < space.len() && space.side(y).in_b() => {}
                None if !side.in_a() => {}
                _ => return Err(bad(1, x)),
            }
            match t2[x] {
                Some(y) if side.in_b() && y < space.len() && space.side(y).in_a() => {}
                None if !side.in_b() => {}
                _ => return Err(bad(2, x)),
            }
        }
        Ok(Self { t1, t2 })
    }

    pub fn from_labels(
        space: &FiniteMetricGraph,
        t1: &BTreeMap<String, String>,
        t2: &BTreeMap<String, String>,
    ) -> Result<Self, FixedPointError> {
        let table = |m: &BTreeMap<String, String>| -> Result<Vec<Option<PointId>>, FixedPointError> {
            let mut out = vec![None; space.len()];
            for (from, to) in m {
                out[space.id_of(from)?] = Some(space.id_of(to)?);
            }
            Ok(out)
        };
        Self::new(space, table(t1)?, table(t2)?)
    }

    /// Splits a cyclic map into its restrictions to `A` and to `B`.
    pub fn from_cyclic(space: &FiniteMetricGraph, map: &CyclicMap) -> Result<Self, FixedPointError> {
        let t1 = (0..space.len())
            .map(|x| space.side(x).in_a().then(|| map.apply(x)))
            .collect();
        let t2 = (0..space.len())
            .map(|x| space.side(x).in_b().then(|| map.apply(x)))
            .collect();
        Self::new(space, t1, t2)
    }

    /// `T_i x` for `i ∈ {1, 2}`, if defined.
    pub fn apply(&self, i: u8, x: PointId) -> Option<PointId> {
        if i == 1 {
            self.t1[x]
        } else {
            self.t2[x]
        }
    }

    pub fn t1_labels(&self, space: &FiniteMetricGraph) -> BTreeMap<String, String> {
        labels(space, &self.t1)
    }

    pub fn t2_labels(&self, space: &FiniteMetricGraph) -> BTreeMap<String, String> {
        labels(space, &self.t2)
    }
}

fn labels(space: &FiniteMetricGraph, table: &[Option<PointId>]) -> BTreeMap<String, String> {
    table
        .iter()
        .enumerate()
        .filter_map(|(x, t)| t.map(|t| (space.label(x).to_string(), space.label(t).to_string())))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PsiMode {
    /// Steps along `x → T_i x → T_j T_i x`.
    #[default]
    Basic,
    /// Every pair `x, y ∈ A_i` with `(x, T_i y)` an edge; this is what the
    /// uniqueness argument needs.
    Strengthened,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsiOptions {
    pub mode: PsiMode,
    pub tol: f64,
    pub execution: Execution,
}

impl Default for PsiOptions {
    fn default() -> Self {
        Self {
            mode: PsiMode::Basic,
            tol: TOL_INEQ,
            execution: Execution::default(),
        }
    }
}

fn distance_grid(space: &FiniteMetricGraph) -> Vec<f64> {
    let n = space.len();
    let mut grid: Vec<f64> = (0..n).flat_map(|x| (x..n).map(move |y| (x, y))).map(|(x, y)| space.dist(x, y)).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    grid
}

/// Checks the `ψ`-contraction condition for both orderings `(i, j)`.
///
/// In basic mode a violation's `x` and `y` are both the start point; in
/// strengthened mode they are the pair `(x, y)`. A missing edge is reported
/// with kind [`ViolationKind::MissingEdge`].
pub fn verify_g_psi_contraction(
    space: &FiniteMetricGraph,
    pair: &PairMaps,
    psi: &PsiGauge,
    opts: &PsiOptions,
) -> Result<ContractionReport, FixedPointError> {
    psi.validate(&distance_grid(space))?;
    let mut outcomes = Vec::new();
    for (i, j) in [(1u8, 2u8), (2, 1)] {
        let domain: Vec<PointId> = (0..space.len()).filter(|&x| pair.apply(i, x).is_some()).collect();
        let check = |x: PointId, y: PointId, out: &mut PairOutcome| {
            let tiy = pair.apply(i, y).expect("domain point");
            if !space.has_edge(x, tiy) {
                return;
            }
            out.checked += 1;
            let tix = pair.apply(i, x).expect("domain point");
            let tjtiy = pair.apply(j, tiy).expect("sides checked at construction");
            let step = space.dist(x, tiy);
            let lhs = space.dist(tix, tjtiy);
            let rhs = psi.eval(step) * step;
            if !space.has_edge(tix, tjtiy) {
                out.failures.push(Violation {
                    x,
                    y,
                    lhs,
                    rhs,
                    kind: ViolationKind::MissingEdge,
                });
            } else if lhs > rhs {
                out.failures.push(Violation {
                    x,
                    y,
                    lhs,
                    rhs,
                    kind: ViolationKind::Inequality,
                });
            }
        };
        outcomes.extend(opts.execution.map_slice(&domain, |&x| {
            let mut out = PairOutcome::default();
            match opts.mode {
                PsiMode::Basic => check(x, x, &mut out),
                PsiMode::Strengthened => {
                    for &y in &domain {
                        check(x, y, &mut out);
                    }
                }
            }
            out
        }));
    }
    Ok(ContractionReport::from_outcomes(outcomes, opts.tol))
}

/// `ψⁿ · d₀ / (1 − ψ)`: the tail bound on `d(xₙ, xₙ₊ₘ)` for every `m`.
pub fn apriori_bound(d0: f64, psi_at_d0: f64, n: usize) -> Result<f64, FixedPointError> {
    if !(0.0..1.0).contains(&psi_at_d0) {
        return Err(FixedPointError::InvalidPsi(psi_at_d0));
    }
    Ok(psi_at_d0.powi(n as i32) * d0 / (1.0 - psi_at_d0))
}

/// The pair and `ψ` induced by a cyclic `(φ, c + I)`-contraction: the
/// restrictions of `map` to each side, with `t (1 − ψ(t)) = φ(t) − φ(d(A, B))`.
pub fn induced_pair(
    space: &FiniteMetricGraph,
    map: &CyclicMap,
    phi: &GaugeSpec,
) -> Result<(PairMaps, PsiGauge), FixedPointError> {
    let geom = pair_distance(space)?;
    Ok((PairMaps::from_cyclic(space, map)?, PsiGauge::induced(phi.clone(), geom.d_ab)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Check transitivity on `A ∪ B` before solving.
    pub check_hypotheses: bool,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            tol: TOL_FIXED,
            max_iter: 10_000,
            check_hypotheses: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointTrace {
    /// `x₀, T₁x₀, T₂T₁x₀, ...`
    pub points: Vec<PointId>,
    /// `dₙ = d(xₙ, xₙ₊₁)`
    pub gaps: Vec<f64>,
    /// `ψ(d₀)ⁿ d₀ / (1 − ψ(d₀))` for each `n` with a measured gap.
    pub apriori: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointResult {
    pub p: PointId,
    pub residual_t1: f64,
    pub residual_t2: f64,
    pub trace: FixedPointTrace,
}

/// Residuals `d(p, T₁p)`, `d(p, T₂p)` when `p` lies on both sides.
fn residuals(space: &FiniteMetricGraph, pair: &PairMaps, p: PointId) -> Option<(f64, f64)> {
    Some((space.dist(p, pair.apply(1, p)?), space.dist(p, pair.apply(2, p)?)))
}

pub fn solve_common_fixed_point(
    space: &FiniteMetricGraph,
    pair: &PairMaps,
    psi: &PsiGauge,
    x0: PointId,
    opts: &FixedPointOptions,
) -> Result<FixedPointResult, FixedPointError> {
    space.check_id(x0)?;
    let seed_ok = pair.apply(1, x0).is_some_and(|t| space.has_edge(x0, t));
    if !seed_ok {
        return Err(FixedPointError::SeedNotEligible(space.label(x0).to_string()));
    }
    if opts.check_hypotheses {
        if let Verdict::Fails(w) = check_property_star(space, Scope::Union) {
            return Err(FixedPointError::HypothesisViolated(Hypothesis::PropertyStar(w)));
        }
    }
    let mut points = vec![x0];
    let mut gaps = Vec::new();
    let mut seen = BTreeSet::new();
    for n in 0.. {
        let cur = points[n];
        if let Some((r1, r2)) = residuals(space, pair, cur) {
            if r1 <= opts.tol && r2 <= opts.tol {
                let apriori = match gaps.first() {
                    Some(&d0) => {
                        let q = psi.eval(d0);
                        (0..gaps.len())
                            .map(|k| apriori_bound(d0, q, k))
                            .collect::<Result<_, _>>()?
                    }
                    None => Vec::new(),
                };
                return Ok(FixedPointResult {
                    p: cur,
                    residual_t1: r1,
                    residual_t2: r2,
                    trace: FixedPointTrace { points, gaps, apriori },
                });
            }
        }
        let which = if n % 2 == 0 { 1 } else { 2 };
        let last_gap = gaps.last().copied().unwrap_or(f64::NAN);
        if n >= opts.max_iter || !seen.insert((cur, which)) {
            return Err(FixedPointError::NoConvergence {
                iterations: n,
                gap: last_gap,
            });
        }
        let next = pair
            .apply(which, cur)
            .ok_or(FixedPointError::NoConvergence { iterations: n, gap: last_gap })?;
        gaps.push(space.dist(cur, next));
        points.push(next);
    }
    unreachable!("the loop only exits by returning")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct UniquenessRegime {
    pub weakly_connected: bool,
    /// Every two points of `A` have a common in-neighbour in `A`.
    pub weak_friendship: bool,
}

pub fn check_uniqueness_regime(space: &FiniteMetricGraph) -> UniquenessRegime {
    let a = space.a_points();
    let weak_friendship = a.iter().enumerate().all(|(k, &x)| {
        a[k..]
            .iter()
            .all(|&y| a.iter().any(|&u| space.has_edge(u, x) && space.has_edge(u, y)))
    });
    UniquenessRegime {
        weakly_connected: a_is_weakly_connected(space),
        weak_friendship,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_graph::{CoordMetric, Side, SpaceBuilder};

    /// Points 1, 1/2, ..., 1/2^depth and 0 on one line, all on both sides,
    /// complete edges, `T₁ = T₂ = halving` with the last level sent to 0.
    fn halving_line(depth: i32) -> (FiniteMetricGraph, PairMaps) {
        let mut s = SpaceBuilder::new();
        for k in 0..=depth {
            s.add_point_at(format!("p{k}"), Side::Both, vec![0.5f64.powi(k)]);
        }
        let zero = s.add_point_at("zero", Side::Both, vec![0.0]);
        for u in 0..=zero {
            for v in 0..=zero {
                s.add_edge(u, v);
            }
        }
        let s = s.build_with_metric(CoordMetric::L1, false).unwrap();
        let half: Vec<_> = (0..=zero).map(|x| Some((x + 1).min(zero))).collect();
        let pair = PairMaps::new(&s, half.clone(), half).unwrap();
        (s, pair)
    }

    #[test]
    fn apriori_examples() {
        assert_eq!(apriori_bound(1.0, 0.5, 3).unwrap(), 0.25);
        assert_eq!(apriori_bound(3.0, 0.25, 0).unwrap(), 4.0);
        assert!(matches!(apriori_bound(1.0, 1.0, 2), Err(FixedPointError::InvalidPsi(_))));
    }

    #[test]
    fn halving_pair_converges_to_zero_along_closed_form() {
        let (s, pair) = halving_line(10);
        let psi = PsiGauge::constant(0.5);
        // only the cut-off step p9 -> p10 -> 0 breaks the ratio
        let report = verify_g_psi_contraction(&s, &pair, &psi, &PsiOptions::default()).unwrap();
        assert!(report.violations.iter().all(|v| s.label(v.x) == "p9"), "{report:?}");
        let r = solve_common_fixed_point(&s, &pair, &psi, 0, &FixedPointOptions::default()).unwrap();
        assert_eq!(s.label(r.p), "zero");
        let gaps = &r.trace.gaps;
        assert_eq!(gaps.len(), 11);
        for (n, g) in gaps[..10].iter().enumerate() {
            assert_eq!(*g, 0.5f64.powi(n as i32 + 1));
        }
        // the last level drops straight to 0
        assert_eq!(gaps[10], 0.5f64.powi(10));
        for (g, b) in gaps.iter().zip(&r.trace.apriori) {
            assert!(g <= b);
        }
        // tail bound at n = 3 dominates the distance to the limit
        assert!(s.dist(r.trace.points[3], r.p) <= apriori_bound(0.5, 0.5, 3).unwrap());
    }

    #[test]
    fn fixed_seed_returns_itself() {
        let (s, pair) = halving_line(4);
        let zero = s.id_of("zero").unwrap();
        let r = solve_common_fixed_point(&s, &pair, &PsiGauge::constant(0.5), zero, &FixedPointOptions::default())
            .unwrap();
        assert_eq!(r.p, zero);
        assert_eq!(r.trace.points.len(), 1);
        assert!(r.trace.apriori.is_empty());
    }

    #[test]
    fn identity_pair_holds_trivially() {
        let (s, _) = halving_line(3);
        let id: Vec<_> = (0..s.len()).map(Some).collect();
        let pair = PairMaps::new(&s, id.clone(), id).unwrap();
        let psi = PsiGauge::constant(0.1);
        let r = verify_g_psi_contraction(&s, &pair, &psi, &PsiOptions::default()).unwrap();
        assert!(r.holds, "{r:?}");
        // the pairwise form compares distinct points and fails
        let strong = PsiOptions {
            mode: PsiMode::Strengthened,
            ..PsiOptions::default()
        };
        assert!(!verify_g_psi_contraction(&s, &pair, &psi, &strong).unwrap().holds);
    }

    #[test]
    fn slow_map_violates_half() {
        // x -> 0.9 x on a geometric grid
        let mut s = SpaceBuilder::new();
        for k in 0..6 {
            s.add_point_at(format!("p{k}"), Side::Both, vec![0.9f64.powi(k)]);
        }
        for u in 0..6 {
            for v in 0..6 {
                s.add_edge(u, v);
            }
        }
        let s = s.build_with_metric(CoordMetric::L1, false).unwrap();
        let t: Vec<_> = (0..6).map(|x| Some((x + 1).min(5))).collect();
        let pair = PairMaps::new(&s, t.clone(), t).unwrap();
        let r = verify_g_psi_contraction(&s, &pair, &PsiGauge::constant(0.5), &PsiOptions::default()).unwrap();
        assert!(!r.holds);
    }

    #[test]
    fn psi_outside_unit_interval_is_rejected() {
        let (s, pair) = halving_line(3);
        let err = verify_g_psi_contraction(&s, &pair, &PsiGauge::constant(1.0), &PsiOptions::default()).unwrap_err();
        assert!(matches!(err, FixedPointError::GaugeClassViolation(_)));
    }

    #[test]
    fn seed_must_be_eligible() {
        let mut s = SpaceBuilder::new();
        s.add_point_at("a", Side::A, vec![0.0]);
        s.add_point_at("b", Side::B, vec![1.0]);
        let s = s.build_with_metric(CoordMetric::L1, true).unwrap();
        let pair = PairMaps::new(&s, vec![Some(1), None], vec![None, Some(0)]).unwrap();
        assert!(matches!(
            solve_common_fixed_point(&s, &pair, &PsiGauge::constant(0.5), 0, &FixedPointOptions::default()),
            Err(FixedPointError::SeedNotEligible(_))
        ));
        assert!(matches!(
            PairMaps::new(&s, vec![Some(0), None], vec![None, Some(0)]),
            Err(FixedPointError::BadMap { map: 1, .. })
        ));
    }

    #[test]
    fn uniqueness_regimes() {
        let build = |edges: &[(usize, usize)]| {
            let mut s = SpaceBuilder::new();
            for k in 0..3 {
                s.add_point_at(format!("a{k}"), Side::A, vec![k as f64]);
            }
            s.add_point_at("b", Side::B, vec![10.0]);
            for &(u, v) in edges {
                s.add_edge(u, v);
            }
            s.build_with_metric(CoordMetric::L1, true).unwrap()
        };
        let complete: Vec<_> = (0..3).flat_map(|u| (0..3).map(move |v| (u, v))).collect();
        let r = check_uniqueness_regime(&build(&complete));
        assert!(r.weakly_connected && r.weak_friendship);
        let r = check_uniqueness_regime(&build(&[(0, 1), (0, 2)]));
        assert!(r.weakly_connected && r.weak_friendship);
        let r = check_uniqueness_regime(&build(&[]));
        assert!(!r.weakly_connected && !r.weak_friendship);
        // a path is connected but 0 and 2 share no in-neighbour
        let r = check_uniqueness_regime(&build(&[(0, 1), (1, 2)]));
        assert!(r.weakly_connected && !r.weak_friendship);
    }
}
