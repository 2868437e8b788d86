//! Tent functions `f_α` (purely imaginary) and `g_α` (shifted real part)
//! under the norm `‖Re‖∞ + ‖Im‖∞`, with the `κ`-class map and graph.
//!
//! Distances use the closed forms `‖f_α − f_β‖ = |α − β|`,
//! `‖g_α − g_β‖ = 1.5 |α − β|` and `‖f_α − g_β‖ = 1 + |α − β|`.

use std::collections::BTreeSet;

use super::{in_range, label_set, Basis, CheckResult, CorpusError, CyclicBundle, ExampleParams};
use crate::bpp_solver::{check_cardinality, enumerate_bpps, solve_bpp, BppOptions, TOL_BPP};
use crate::cyclic_contraction::{
    kappa, verify_g_cyclic_contraction, ContractionOptions, CyclicMap, GaugeSpec, ViolationKind,
};
use crate::metric_graph::{
    check_property_star, has_property_uc, is_sharp_proximal, pair_distance, PointId, Scope, Side, SpaceBuilder,
};
use crate::Verdict;

pub const DEFAULT_TRUNCATION: usize = 16;
pub const MAX_TRUNCATION: usize = 64;

/// The counterexample pair.
pub const ALPHA0: f64 = 0.49;
pub const BETA0: f64 = 0.51;

/// Shift used for the affine `φ₂ = c + s`; it cancels out of the inequality.
const SHIFT: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct Ex22 {
    pub bundle: CyclicBundle,
    /// Parameter `α` of point `i`; `f_α` is point `i`, `g_α` is point
    /// `i + alphas.len()`.
    pub alphas: Vec<f64>,
}

impl Ex22 {
    pub fn f(&self, alpha: f64) -> Option<PointId> {
        self.alphas.iter().position(|&a| (a - alpha).abs() <= 1e-12)
    }

    pub fn g(&self, alpha: f64) -> Option<PointId> {
        self.f(alpha).map(|i| i + self.alphas.len())
    }

    pub fn alpha_of(&self, x: PointId) -> f64 {
        self.alphas[x % self.alphas.len()]
    }
}

/// Sampled parameters with their labels, sorted by `α`: `0`, `1`, every
/// `1/k` for `k ≤ truncation`, two interior points of each `κ` class and
/// the counterexample pair.
pub fn alpha_grid(truncation: usize) -> Vec<(String, f64)> {
    let mut grid = vec![("0".to_string(), 0.0), ("1".to_string(), 1.0)];
    for k in 2..=truncation {
        let lo = 1.0 / k as f64;
        grid.push((format!("1/{k}"), lo));
        let width = 1.0 / (k - 1) as f64 - lo;
        for j in 1..=2 {
            grid.push((format!("k{k}.j{j}"), lo + j as f64 * width / 3.0));
        }
    }
    grid.push(("0.49".into(), ALPHA0));
    grid.push(("0.51".into(), BETA0));
    grid.sort_by(|a, b| a.1.total_cmp(&b.1));
    grid
}

/// `κ` class of a sampled parameter, with `0` and `1` in their own classes.
fn class_of(alpha: f64) -> u64 {
    if alpha == 0.0 {
        0
    } else if alpha == 1.0 {
        1
    } else {
        kappa(alpha).unwrap_or(0)
    }
}

pub fn build_ex22(params: &ExampleParams) -> Result<Ex22, CorpusError> {
    let truncation = in_range(
        "truncation",
        params.truncation.unwrap_or(DEFAULT_TRUNCATION),
        3,
        MAX_TRUNCATION,
        "[3, 64]",
    )?;
    let grid = alpha_grid(truncation);
    let n = grid.len();
    let alphas: Vec<f64> = grid.iter().map(|(_, a)| *a).collect();
    let classes: Vec<u64> = alphas.iter().map(|&a| class_of(a)).collect();

    let mut builder = SpaceBuilder::new();
    for (label, _) in &grid {
        builder.add_point(format!("f_{label}"), Side::A);
    }
    for (label, _) in &grid {
        builder.add_point(format!("g_{label}"), Side::B);
    }
    for i in 0..n {
        for j in 0..n {
            let stated = match classes[i] {
                0 | 1 => i == j,
                c => classes[j] == c && alphas[i] >= alphas[j],
            };
            if stated {
                builder.add_edge(i, n + j);
            }
        }
    }
    let mut table = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..2 * n {
        for j in 0..2 * n {
            let gap = (alphas[i % n] - alphas[j % n]).abs();
            table[i][j] = match (i < n, j < n) {
                (true, true) => gap,
                (false, false) => 1.5 * gap,
                _ => 1.0 + gap,
            };
        }
    }
    let space = builder.build_with_table(table, true)?;

    // Tf_α = g_{1/κ_α} inside (0, 1), g_α otherwise; symmetric on B.
    let target = |i: usize| -> usize {
        match classes[i] {
            0 | 1 => i,
            k => alphas
                .iter()
                .position(|&a| (a - 1.0 / k as f64).abs() <= 1e-15)
                .unwrap_or(i),
        }
    };
    let image: Vec<PointId> = (0..2 * n)
        .map(|x| if x < n { n + target(x) } else { target(x - n) })
        .collect();
    let map = CyclicMap::new(&space, image)?;

    let geom = pair_distance(&space)?;
    if let Verdict::Fails(w) = is_sharp_proximal(&space, &geom) {
        return Err(CorpusError::ClaimFailed(format!("sharp proximality fails at {}", space.label(w.point))));
    }
    if let Verdict::Fails(w) = has_property_uc(&space, &geom) {
        return Err(CorpusError::ClaimFailed(format!("property UC fails at {}", space.label(w.x))));
    }
    if check_property_star(&space, Scope::A).witness().is_some() {
        return Err(CorpusError::ClaimFailed("edge transitivity on A fails".into()));
    }
    Ok(Ex22 {
        bundle: CyclicBundle {
            space,
            map,
            phi1: GaugeSpec::FloorFraction,
            phi2: GaugeSpec::AffineShift { c: SHIFT },
            truncation_boundary: BTreeSet::new(),
        },
        alphas,
    })
}

pub(super) fn reproduce(params: &ExampleParams) -> Result<Vec<CheckResult>, CorpusError> {
    let ex = build_ex22(params)?;
    let b = &ex.bundle;
    let space = &b.space;
    let mut checks = Vec::new();

    let (f0, g0) = (ex.f(ALPHA0).unwrap_or(0), ex.g(BETA0).unwrap_or(0));
    let image_gap = space.dist(b.map.apply(f0), b.map.apply(g0));
    let gap = space.dist(f0, g0);
    checks.push(CheckResult::new(
        "counterexample ‖Tf − Tg‖",
        Basis::Stated,
        "1 + 1/6",
        format!("{image_gap}"),
        (image_gap - 7.0 / 6.0).abs() <= 1e-12,
    ));
    checks.push(CheckResult::new(
        "counterexample ‖f − g‖",
        Basis::Stated,
        "1.02",
        format!("{gap}"),
        (gap - 1.02).abs() <= 1e-12,
    ));
    checks.push(CheckResult::new(
        "counterexample expands",
        Basis::Stated,
        "‖Tf − Tg‖ > ‖f − g‖",
        format!("{image_gap} vs {gap}"),
        image_gap > gap,
    ));

    let graph = verify_g_cyclic_contraction(space, &b.map, &b.phi1, &b.phi2, &ContractionOptions::default())?;
    checks.push(CheckResult::new(
        "graph contraction with floor-fraction gauge",
        Basis::Stated,
        "0 violations",
        format!("{} violations over {} pairs", graph.violations.len(), graph.checked_pairs),
        graph.is_contraction(),
    ));
    let plain = verify_g_cyclic_contraction(space, &b.map, &b.phi1, &b.phi2, &ContractionOptions::all_pairs())?;
    let hits_pair = plain
        .violations
        .iter()
        .any(|v| v.kind == ViolationKind::Inequality && v.x == f0 && v.y == g0);
    checks.push(CheckResult::new(
        "edge-free check fails at the counterexample pair",
        Basis::Stated,
        "violation at (f_0.49, g_0.51)",
        format!("{} violations, pair present: {hits_pair}", plain.violations.len()),
        hits_pair,
    ));

    let bpps = enumerate_bpps(space, &b.map, TOL_BPP)?;
    let truncation = params.truncation.unwrap_or(DEFAULT_TRUNCATION);
    let expected: BTreeSet<PointId> = std::iter::once(0.0)
        .chain((1..=truncation).map(|k| 1.0 / k as f64))
        .filter_map(|a| ex.f(a))
        .collect();
    checks.push(CheckResult::new(
        "best proximity points",
        Basis::Derived,
        label_set(space, &expected),
        label_set(space, &bpps),
        bpps == expected,
    ));
    let card = check_cardinality(space, &b.map, &BppOptions::default())?;
    checks.push(CheckResult::new(
        "count equals classes meeting A",
        Basis::Stated,
        format!("{}", truncation + 1),
        format!("{} points, {} classes", card.bpp_count, card.component_count),
        card.equal && card.bpp_count == truncation + 1,
    ));

    let solved = solve_bpp(space, &b.map, f0, &BppOptions::unchecked())?;
    let want = ex.f(1.0 / 3.0).unwrap_or(0);
    checks.push(CheckResult::new(
        "orbit of f_0.49 reaches f_1/3",
        Basis::Derived,
        space.label(want).to_string(),
        space.label(solved.bpp).to_string(),
        solved.bpp == want,
    ));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_sorted_and_classes_are_whole() {
        let grid = alpha_grid(5);
        assert_eq!(grid.len(), 2 + 4 * 3 + 2);
        assert!(grid.windows(2).all(|w| w[0].1 < w[1].1));
        assert_eq!(class_of(0.49), 3);
        assert_eq!(class_of(0.51), 2);
        assert_eq!(class_of(1.0 / 7.0), 7);
    }

    #[test]
    fn rejects_out_of_range() {
        for t in [2, 65] {
            let p = ExampleParams {
                truncation: Some(t),
                ..Default::default()
            };
            assert!(matches!(build_ex22(&p), Err(CorpusError::ParamOutOfRange { .. })));
        }
    }

    #[test]
    fn small_truncation_reproduces() {
        let p = ExampleParams {
            truncation: Some(8),
            ..Default::default()
        };
        let checks = reproduce(&p).unwrap();
        assert!(checks.iter().all(|c| c.pass), "{checks:#?}");
    }
}
