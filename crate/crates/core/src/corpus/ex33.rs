//! Dyadic heights on two vertical lines of the `ℓ₁` plane: `A` at `x = 0`,
//! `B` at `x = 1`, heights `{0} ∪ {2⁻ⁿ : 1 ≤ n ≤ depth}`. The map crosses
//! sides and halves the height; the deepest level is sent to height `0`.

use std::collections::BTreeSet;

use super::{in_range, label_set, Basis, CheckResult, CorpusError, CyclicBundle, ExampleParams};
use crate::bpp_solver::{check_cardinality, enumerate_bpps, iterate_orbit, solve_bpp, BppOptions, TOL_BPP};
use crate::cyclic_contraction::{verify_g_cyclic_contraction, ContractionOptions, CyclicMap, GaugeSpec};
use crate::metric_graph::{
    a_is_weakly_connected, check_property_star, has_property_uc, pair_distance, CoordMetric, PointId, Scope, Side,
    SpaceBuilder,
};
use crate::Verdict;

pub const DEFAULT_DEPTH: usize = 12;
pub const MAX_DEPTH: usize = 40;

#[derive(Debug, Clone)]
pub struct Ex33 {
    pub bundle: CyclicBundle,
    /// Heights shared by both lines; point `i` is `(0, heights[i])` and point
    /// `i + heights.len()` is `(1, heights[i])`.
    pub heights: Vec<f64>,
}

impl Ex33 {
    /// `(0, 0)`.
    pub fn origin(&self) -> PointId {
        0
    }
}

pub(super) fn height_label(n: usize) -> String {
    if n == 0 {
        "0".into()
    } else {
        format!("2^-{n}")
    }
}

pub fn build_ex33(params: &ExampleParams) -> Result<Ex33, CorpusError> {
    let depth = in_range("depth", params.depth.unwrap_or(DEFAULT_DEPTH), 1, MAX_DEPTH, "[1, 40]")?;
    // index 0 is height 0, index n is 2^-n
    let heights: Vec<f64> = (0..=depth)
        .map(|n| if n == 0 { 0.0 } else { 0.5f64.powi(n as i32) })
        .collect();
    let k = heights.len();
    let mut builder = SpaceBuilder::new();
    for (n, &y) in heights.iter().enumerate() {
        builder.add_point_at(format!("(0,{})", height_label(n)), Side::A, vec![0.0, y]);
    }
    for (n, &y) in heights.iter().enumerate() {
        builder.add_point_at(format!("(1,{})", height_label(n)), Side::B, vec![1.0, y]);
    }
    for x in 0..2 * k {
        for y in 0..2 * k {
            let same_side = (x < k) == (y < k);
            let d = CoordMetric::L1.distance(&[(x >= k) as u8 as f64, heights[x % k]], &[
                (y >= k) as u8 as f64,
                heights[y % k],
            ]);
            if (same_side && d <= 0.5) || d == 1.0 {
                builder.add_edge(x, y);
            }
        }
    }
    let space = builder.build_with_metric(CoordMetric::L1, true)?;
    let next = |n: usize| if n == 0 || n == depth { 0 } else { n + 1 };
    let image: Vec<PointId> = (0..2 * k)
        .map(|x| if x < k { k + next(x) } else { next(x - k) })
        .collect();
    let map = CyclicMap::new(&space, image)?;

    let geom = pair_distance(&space)?;
    if let Verdict::Fails(w) = has_property_uc(&space, &geom) {
        return Err(CorpusError::ClaimFailed(format!("property UC fails at {}", space.label(w.x))));
    }
    if check_property_star(&space, Scope::A).witness().is_some() {
        return Err(CorpusError::ClaimFailed("edge transitivity on A fails".into()));
    }
    if !a_is_weakly_connected(&space) {
        return Err(CorpusError::ClaimFailed("A is not weakly connected".into()));
    }
    Ok(Ex33 {
        bundle: CyclicBundle {
            space,
            map,
            phi1: GaugeSpec::Linear { c: 0.5 },
            phi2: GaugeSpec::AffineShift { c: 1.0 },
            truncation_boundary: [depth, k + depth].into_iter().collect(),
        },
        heights,
    })
}

pub(super) fn reproduce(params: &ExampleParams) -> Result<Vec<CheckResult>, CorpusError> {
    let ex = build_ex33(params)?;
    let b = &ex.bundle;
    let space = &b.space;
    let mut checks = Vec::new();

    let opts = ContractionOptions {
        exclude: b.truncation_boundary.clone(),
        ..ContractionOptions::default()
    };
    let report = verify_g_cyclic_contraction(space, &b.map, &b.phi1, &b.phi2, &opts)?;
    checks.push(CheckResult::new(
        "graph contraction with φ(s) = s/2 away from the cut-off level",
        Basis::Stated,
        "0 violations",
        format!("{} violations over {} pairs", report.violations.len(), report.checked_pairs),
        report.is_contraction(),
    ));

    let bpps = enumerate_bpps(space, &b.map, TOL_BPP)?;
    let expected: BTreeSet<PointId> = [ex.origin()].into();
    checks.push(CheckResult::new(
        "best proximity points",
        Basis::Stated,
        label_set(space, &expected),
        label_set(space, &bpps),
        bpps == expected,
    ));

    let mut all_reach = true;
    let mut monotone = true;
    for x in space.a_points() {
        all_reach &= solve_bpp(space, &b.map, x, &BppOptions::default())?.bpp == ex.origin();
        let orbit = iterate_orbit(space, &b.map, x, 1000, 1e-12)?;
        monotone &= orbit.max_gap_increase() <= 0.0 && (orbit.gaps.last().copied().unwrap_or(0.0) - 1.0).abs() <= 1e-12;
    }
    checks.push(CheckResult::new(
        "every seed in A reaches (0,0)",
        Basis::Stated,
        "true",
        all_reach.to_string(),
        all_reach,
    ));
    checks.push(CheckResult::new(
        "gaps non-increasing down to d(A,B) = 1",
        Basis::Derived,
        "true",
        monotone.to_string(),
        monotone,
    ));
    let card = check_cardinality(space, &b.map, &BppOptions::default())?;
    checks.push(CheckResult::new(
        "one class meets A",
        Basis::Stated,
        "1",
        card.component_count.to_string(),
        card.component_count == 1 && card.equal,
    ));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape() {
        let ex = build_ex33(&ExampleParams {
            depth: Some(4),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(ex.bundle.space.len(), 10);
        assert_eq!(ex.bundle.space.label(0), "(0,0)");
        assert_eq!(ex.bundle.space.label(7), "(1,2^-2)");
        assert_eq!(ex.bundle.map.apply(1), 7);
        assert_eq!(ex.bundle.map.apply(4), 5);
        assert!(build_ex33(&ExampleParams {
            depth: Some(0),
            ..Default::default()
        })
        .is_err());
    }
}
