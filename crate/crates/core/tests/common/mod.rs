//! Shared strategies for the property and oracle tests.
#![allow(dead_code)]

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bestprox::corpus::CyclicBundle;
use bestprox::cyclic_contraction::CyclicMap;
use bestprox::fixed_point::{PairMaps, PsiGauge};
use bestprox::metric_graph::{CoordMetric, FiniteMetricGraph, PointId, Side, SpaceBuilder};
use bestprox::synth::{passes_filters, random_candidate, SynthConfig};

/// Small `ℓ₁` instances with integer coordinates (so distance ties are
/// common), random sides and random edges. Point 0 is in `A`, point 1 in
/// `B`.
pub fn arb_space() -> impl Strategy<Value = FiniteMetricGraph> {
    (2usize..8)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(0i32..4, n),
                prop::collection::vec(0u8..3, n),
                prop::collection::vec(prop::bool::weighted(0.3), n * n),
            )
        })
        .prop_map(|(xs, sides, edges)| {
            let n = xs.len();
            let mut b = SpaceBuilder::new();
            for (i, (&x, &s)) in xs.iter().zip(&sides).enumerate() {
                let side = match (i, s) {
                    (0, _) => Side::A,
                    (1, _) => Side::B,
                    (_, 0) => Side::A,
                    (_, 1) => Side::B,
                    _ => Side::Both,
                };
                b.add_point_at(format!("p{i}"), side, vec![x as f64, i as f64]);
            }
            for i in 0..n {
                for j in 0..n {
                    if edges[i * n + j] {
                        b.add_edge(i, j);
                    }
                }
            }
            b.build_with_metric(CoordMetric::L1, true).expect("valid by construction")
        })
}

/// A cyclic map on `space` picked by `choice`: every point goes to one of
/// the admissible targets on the other side.
pub fn map_from_choices(space: &FiniteMetricGraph, choice: &[usize]) -> CyclicMap {
    let image = (0..space.len())
        .map(|x| {
            let side = space.side(x);
            let targets: Vec<PointId> = (0..space.len())
                .filter(|&y| {
                    let s = space.side(y);
                    (!side.in_a() || s.in_b()) && (!side.in_b() || s.in_a())
                })
                .collect();
            targets[choice[x % choice.len()] % targets.len()]
        })
        .collect();
    CyclicMap::new(space, image).expect("targets are admissible")
}

/// An arbitrary instance with an arbitrary cyclic map.
pub fn arb_space_and_map() -> impl Strategy<Value = (FiniteMetricGraph, CyclicMap)> {
    (arb_space(), prop::collection::vec(any::<usize>(), 8)).prop_map(|(s, c)| {
        let m = map_from_choices(&s, &c);
        (s, m)
    })
}

pub fn candidate(seed: u64) -> CyclicBundle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_candidate(&mut rng, &SynthConfig::default())
}

/// A generator candidate that passes every hypothesis filter.
pub fn filtered(seed: u64) -> Option<CyclicBundle> {
    let b = candidate(seed);
    passes_filters(&b).then_some(b)
}

/// Star-shaped `ψ` instances in the sup-norm plane: `A` on the positive
/// real axis, `B` on the positive imaginary axis, the origin in both, all
/// edges present. `T₁` sends `(a, 0)` to some `(0, b)` with `b ≤ r a` (or
/// the origin), `T₂` likewise, where `r` is `1/2` or `1`.
#[derive(Debug, Clone)]
pub struct StarInstance {
    pub space: FiniteMetricGraph,
    pub pair: PairMaps,
    pub map: CyclicMap,
    pub ratio: f64,
    pub origin: PointId,
}

pub fn arb_star() -> impl Strategy<Value = StarInstance> {
    (
        prop::collection::vec(1u32..=1000, 1..6),
        prop::collection::vec(1u32..=1000, 1..6),
        prop::collection::vec(any::<usize>(), 12),
        any::<bool>(),
    )
        .prop_map(|(a_amp, b_amp, choice, halve)| {
            let ratio = if halve { 0.5 } else { 1.0 };
            let mut a: Vec<f64> = a_amp.iter().map(|&v| v as f64 / 1000.0).collect();
            let mut bs: Vec<f64> = b_amp.iter().map(|&v| v as f64 / 1000.0).collect();
            for v in [&mut a, &mut bs] {
                v.sort_by(f64::total_cmp);
                v.dedup();
            }
            let mut builder = SpaceBuilder::new();
            let origin = builder.add_point_at("0", Side::Both, vec![0.0, 0.0]);
            let a_ids: Vec<PointId> = a
                .iter()
                .map(|&v| builder.add_point_at(format!("a{v}"), Side::A, vec![v, 0.0]))
                .collect();
            let b_ids: Vec<PointId> = bs
                .iter()
                .map(|&v| builder.add_point_at(format!("b{v}"), Side::B, vec![0.0, v]))
                .collect();
            let n = builder.len();
            for x in 0..n {
                for y in 0..n {
                    builder.add_edge(x, y);
                }
            }
            let space = builder.build_with_metric(CoordMetric::Sup, true).expect("valid");
            let pick = |amp: f64, others: &[f64], ids: &[PointId], k: usize| -> PointId {
                let ok: Vec<PointId> = std::iter::once(origin)
                    .chain(others.iter().zip(ids).filter(|(&o, _)| o <= ratio * amp).map(|(_, &id)| id))
                    .collect();
                ok[choice[k % choice.len()] % ok.len()]
            };
            let mut image = vec![origin; n];
            for (k, (&v, &id)) in a.iter().zip(&a_ids).enumerate() {
                image[id] = pick(v, &bs, &b_ids, k);
            }
            for (k, (&v, &id)) in bs.iter().zip(&b_ids).enumerate() {
                image[id] = pick(v, &a, &a_ids, k + 6);
            }
            let map = CyclicMap::new(&space, image).expect("crosses sides");
            let pair = PairMaps::from_cyclic(&space, &map).expect("sides match");
            StarInstance {
                space,
                pair,
                map,
                ratio,
                origin,
            }
        })
}

pub fn half() -> PsiGauge {
    PsiGauge::constant(0.5)
}
