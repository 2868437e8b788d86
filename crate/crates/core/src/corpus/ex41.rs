//! Complex-valued functions on `[0, 1]` under `max(‖Re‖∞, ‖Im‖∞)`: real
//! non-negative functions form `A`, purely imaginary ones form `B`, and the
//! zero function sits in both.
//!
//! The sample keeps three shapes (`1`, `t`, `sin πt`) at amplitudes `2⁻ʲ`
//! for `1 ≤ j ≤ depth`, evaluated on a uniform time grid. With constant
//! `ψ = 1/2` both maps swap real and imaginary parts and halve the
//! amplitude, so the sample is closed under them once the last level is
//! sent to zero.

use super::{in_range, Basis, CheckResult, CorpusError, ExampleParams, PairBundle};
use crate::fixed_point::{
    check_uniqueness_regime, solve_common_fixed_point, verify_g_psi_contraction, FixedPointOptions, PairMaps,
    PsiGauge, PsiOptions,
};
use crate::metric_graph::{check_property_star, CoordMetric, PointId, Scope, Side, SpaceBuilder};

pub const DEFAULT_DEPTH: usize = 20;
pub const MAX_DEPTH: usize = 40;
pub const DEFAULT_NODES: usize = 64;
pub const PSI: f64 = 0.5;

type Shape = (&'static str, fn(f64) -> f64);

const SHAPES: [Shape; 3] = [
    ("1", |_| 1.0),
    ("t", |t| t),
    ("sin", |t| (std::f64::consts::PI * t).sin()),
];

#[derive(Debug, Clone)]
pub struct Ex41 {
    pub bundle: PairBundle,
    /// The zero function.
    pub zero: PointId,
    pub nodes: usize,
}

pub fn build_ex41(params: &ExampleParams) -> Result<Ex41, CorpusError> {
    let depth = in_range("depth", params.depth.unwrap_or(DEFAULT_DEPTH), 1, MAX_DEPTH, "[1, 40]")?;
    let nodes = in_range("nodes", params.nodes.unwrap_or(DEFAULT_NODES), 2, 4096, "[2, 4096]")?;
    let times: Vec<f64> = (0..nodes).map(|i| i as f64 / (nodes - 1) as f64).collect();
    let mut builder = SpaceBuilder::new();
    // coordinates: real parts at every node, then imaginary parts
    let zero = builder.add_point_at("0", Side::Both, vec![0.0; 2 * nodes]);
    // id of (side, shape, level), level 1..=depth
    let id = |imag: bool, shape: usize, level: usize| 1 + ((imag as usize * SHAPES.len() + shape) * depth) + level - 1;
    for imag in [false, true] {
        for (name, shape) in SHAPES {
            for level in 1..=depth {
                let amp = 0.5f64.powi(level as i32);
                let mut coords = vec![0.0; 2 * nodes];
                let offset = if imag { nodes } else { 0 };
                for (k, &t) in times.iter().enumerate() {
                    coords[offset + k] = amp * shape(t);
                }
                let label = format!("{}{name}/2^{level}", if imag { "i·" } else { "" });
                builder.add_point_at(label, if imag { Side::B } else { Side::A }, coords);
            }
        }
    }
    let n = builder.len();
    for x in 0..n {
        for y in 0..n {
            builder.add_edge(x, y);
        }
    }
    let space = builder.build_with_metric(CoordMetric::Sup, true)?;
    // the graph keeps pairs at distance below 1; every sampled distance is
    // at most 1/2, so that is all pairs
    debug_assert!((0..n).all(|x| (0..n).all(|y| space.dist(x, y) < 1.0)));

    let halve = |imag: bool, shape: usize, level: usize| {
        if level == depth {
            zero
        } else {
            id(!imag, shape, level + 1)
        }
    };
    let mut t1 = vec![None; n];
    let mut t2 = vec![None; n];
    t1[zero] = Some(zero);
    t2[zero] = Some(zero);
    for shape in 0..SHAPES.len() {
        for level in 1..=depth {
            t1[id(false, shape, level)] = Some(halve(false, shape, level));
            t2[id(true, shape, level)] = Some(halve(true, shape, level));
        }
    }
    let pair = PairMaps::new(&space, t1, t2)?;
    if check_property_star(&space, Scope::Union).witness().is_some() {
        return Err(CorpusError::ClaimFailed("edge transitivity on A ∪ B fails".into()));
    }
    if !check_uniqueness_regime(&space).weakly_connected {
        return Err(CorpusError::ClaimFailed("A is not weakly connected".into()));
    }
    Ok(Ex41 {
        bundle: PairBundle {
            space,
            pair,
            psi: PsiGauge::constant(PSI),
            seed: id(false, 0, 1),
        },
        zero,
        nodes,
    })
}

pub(super) fn reproduce(params: &ExampleParams) -> Result<Vec<CheckResult>, CorpusError> {
    let ex = build_ex41(params)?;
    let b = &ex.bundle;
    let space = &b.space;
    let mut checks = Vec::new();

    let report = verify_g_psi_contraction(space, &b.pair, &b.psi, &PsiOptions::default())?;
    checks.push(CheckResult::new(
        "pair is a ψ-contraction with ψ = 1/2",
        Basis::Stated,
        "0 violations",
        format!("{} violations over {} steps", report.violations.len(), report.checked_pairs),
        report.is_contraction(),
    ));

    let res = solve_common_fixed_point(space, &b.pair, &b.psi, b.seed, &FixedPointOptions::default())?;
    let sup = space.coords(res.p).map_or(f64::NAN, |c| c.iter().fold(0.0, |m, v| m.max(v.abs())));
    checks.push(CheckResult::new(
        "common fixed point is the zero function",
        Basis::Stated,
        "0",
        format!("{} (sup {sup})", space.label(res.p)),
        res.p == ex.zero && sup <= 1e-8 && res.residual_t1.max(res.residual_t2) <= 1e-8,
    ));
    let under = res.trace.gaps.iter().zip(&res.trace.apriori).all(|(g, a)| g <= a);
    checks.push(CheckResult::new(
        "gaps stay under ψⁿ d₀ / (1 − ψ)",
        Basis::Stated,
        "true",
        under.to_string(),
        under && res.trace.gaps.len() == res.trace.apriori.len(),
    ));
    let regime = check_uniqueness_regime(space);
    checks.push(CheckResult::new(
        "A is weakly connected",
        Basis::Stated,
        "true",
        regime.weakly_connected.to_string(),
        regime.weakly_connected,
    ));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maps_swap_parts_and_halve() {
        let ex = build_ex41(&ExampleParams {
            depth: Some(3),
            nodes: Some(5),
            ..Default::default()
        })
        .unwrap();
        let s = &ex.bundle.space;
        assert_eq!(s.len(), 1 + 2 * 3 * 3);
        let seed = ex.bundle.seed;
        assert_eq!(s.label(seed), "1/2^1");
        let image = ex.bundle.pair.apply(1, seed).unwrap();
        assert_eq!(s.label(image), "i·1/2^2");
        assert_eq!(s.dist(seed, image), 0.5);
        let last = s.id_of("i·sin/2^3").unwrap();
        assert_eq!(ex.bundle.pair.apply(2, last), Some(ex.zero));
    }
}
