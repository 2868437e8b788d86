//! Two vertical lines of the `ℓ₁` unit square where `(a, x)` relates to
//! `(b, y)` when one height is half the other or they are equal. The map
//! crosses sides and halves the height, fixing heights `0` and `1`.
//!
//! Truncated to the chains `2⁻ⁿ` and `3·2⁻ⁿ⁻²` for `n ≤ depth`, plus
//! heights `0` and `1`; each chain's last level is sent to height `0`.

use std::collections::BTreeSet;

use super::{in_range, label_set, Basis, CheckResult, CorpusError, CyclicBundle, ExampleParams};
use crate::bpp_solver::{enumerate_bpps, x_t2_a_set, TOL_BPP};
use crate::cyclic_contraction::{verify_g_cyclic_contraction, ContractionOptions, CyclicMap, GaugeSpec};
use crate::metric_graph::{check_property_star, component_of, CoordMetric, PointId, Scope, Side, SpaceBuilder};

pub const DEFAULT_DEPTH: usize = 10;
pub const MAX_DEPTH: usize = 40;

#[derive(Debug, Clone)]
pub struct Ex35 {
    pub bundle: CyclicBundle,
    /// Point `i` is `(0, heights[i])`, point `i + heights.len()` is
    /// `(1, heights[i])`.
    pub heights: Vec<f64>,
}

impl Ex35 {
    pub fn a_at(&self, height: f64) -> Option<PointId> {
        self.heights.iter().position(|&h| h == height)
    }

    pub fn b_at(&self, height: f64) -> Option<PointId> {
        self.a_at(height).map(|i| i + self.heights.len())
    }
}

pub fn build_ex35(params: &ExampleParams) -> Result<Ex35, CorpusError> {
    let depth = in_range("depth", params.depth.unwrap_or(DEFAULT_DEPTH), 1, MAX_DEPTH, "[1, 40]")?;
    let mut heights = vec![0.0, 1.0];
    let mut labels = vec!["0".to_string(), "1".to_string()];
    // halving successor of each height, by index
    let mut next = vec![0, 1];
    let mut cut = Vec::new();
    for (base, name) in [(1.0, ""), (0.75, "3·")] {
        for n in 0..=depth {
            if base == 1.0 && n == 0 {
                continue;
            }
            let idx = heights.len();
            heights.push(base * 0.5f64.powi(n as i32));
            labels.push(if base == 1.0 {
                format!("2^-{n}")
            } else {
                format!("{name}2^-{}", n + 2)
            });
            if n == depth {
                next.push(0);
                cut.push(idx);
            } else {
                next.push(idx + 1);
            }
        }
    }
    let k = heights.len();
    let mut builder = SpaceBuilder::new();
    for (label, &y) in labels.iter().zip(&heights) {
        builder.add_point_at(format!("(0,{label})"), Side::A, vec![0.0, y]);
    }
    for (label, &y) in labels.iter().zip(&heights) {
        builder.add_point_at(format!("(1,{label})"), Side::B, vec![1.0, y]);
    }
    for x in 0..2 * k {
        for y in 0..2 * k {
            let (hx, hy) = (heights[x % k], heights[y % k]);
            if hx == hy || hx == hy / 2.0 || hy == hx / 2.0 {
                builder.add_edge(x, y);
            }
        }
    }
    let space = builder.build_with_metric(CoordMetric::L1, true)?;
    let image: Vec<PointId> = (0..2 * k)
        .map(|x| if x < k { k + next[x] } else { next[x - k] })
        .collect();
    let map = CyclicMap::new(&space, image)?;
    let truncation_boundary = cut.iter().flat_map(|&i| [i, i + k]).collect();
    Ok(Ex35 {
        bundle: CyclicBundle {
            space,
            map,
            phi1: GaugeSpec::Linear { c: 0.5 },
            phi2: GaugeSpec::AffineShift { c: 1.0 },
            truncation_boundary,
        },
        heights,
    })
}

pub(super) fn reproduce(params: &ExampleParams) -> Result<Vec<CheckResult>, CorpusError> {
    let ex = build_ex35(params)?;
    let b = &ex.bundle;
    let space = &b.space;
    let mut checks = Vec::new();
    let pt = |h: f64| ex.a_at(h).unwrap_or(0);

    let bpps = enumerate_bpps(space, &b.map, TOL_BPP)?;
    let expected: BTreeSet<PointId> = [pt(0.0), pt(1.0)].into();
    checks.push(CheckResult::new(
        "best proximity points",
        Basis::Stated,
        label_set(space, &expected),
        label_set(space, &bpps),
        bpps == expected,
    ));

    let admissible = x_t2_a_set(space, &b.map);
    let interior_excluded = ex
        .heights
        .iter()
        .filter(|&&h| h > 0.0 && h < 1.0)
        .all(|&h| !admissible.contains(&pt(h)));
    checks.push(CheckResult::new(
        "no interior height is admissible for the even orbit",
        Basis::Stated,
        "true",
        interior_excluded.to_string(),
        interior_excluded,
    ));

    let three_quarters = component_of(space, pt(0.75))?;
    let meet: BTreeSet<PointId> = three_quarters.intersection(&bpps).copied().collect();
    checks.push(CheckResult::new(
        "class of (0,3/4) contains no best proximity point",
        Basis::Derived,
        "{}",
        label_set(space, &meet),
        meet.is_empty(),
    ));
    let half = component_of(space, pt(0.5))?;
    let meet: BTreeSet<PointId> = half.intersection(&bpps).copied().collect();
    let only_top: BTreeSet<PointId> = [pt(1.0)].into();
    checks.push(CheckResult::new(
        "class of (0,1/2) meets the best proximity points only at (0,1), not the stated empty set",
        Basis::Finding,
        label_set(space, &only_top),
        label_set(space, &meet),
        meet == only_top,
    ));

    let opts = ContractionOptions {
        exclude: b.truncation_boundary.clone(),
        ..ContractionOptions::default()
    };
    let report = verify_g_cyclic_contraction(space, &b.map, &b.phi1, &b.phi2, &opts)?;
    let (x, y) = (pt(0.5), ex.b_at(1.0).unwrap_or(0));
    let at_pair = report.violations.iter().find(|v| v.x == x && v.y == y);
    checks.push(CheckResult::new(
        "stated contraction fails at ((0,1/2),(1,1))",
        Basis::Finding,
        "lhs 1.75 > rhs 1.25",
        at_pair.map_or("no violation".to_string(), |v| format!("lhs {} > rhs {}", v.lhs, v.rhs)),
        at_pair.is_some_and(|v| (v.lhs - 1.75).abs() <= 1e-12 && (v.rhs - 1.25).abs() <= 1e-12),
    ));
    let star = check_property_star(space, Scope::A);
    checks.push(CheckResult::new(
        "edge transitivity on A fails",
        Basis::Derived,
        "fails",
        if star.holds() { "holds" } else { "fails" },
        !star.holds(),
    ));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chains_and_map() {
        let ex = build_ex35(&ExampleParams {
            depth: Some(3),
            ..Default::default()
        })
        .unwrap();
        // 0, 1, 2^-1..2^-3, 3/4 .. 3/32
        assert_eq!(ex.heights.len(), 2 + 3 + 4);
        let s = &ex.bundle.space;
        let half = ex.a_at(0.5).unwrap();
        assert_eq!(s.label(ex.bundle.map.apply(half)), "(1,2^-2)");
        let top = ex.a_at(1.0).unwrap();
        assert_eq!(s.label(ex.bundle.map.apply(top)), "(1,1)");
        assert_eq!(s.label(ex.a_at(0.375).unwrap()), "(0,3·2^-3)");
        assert_eq!(ex.bundle.truncation_boundary.len(), 4);
    }
}
