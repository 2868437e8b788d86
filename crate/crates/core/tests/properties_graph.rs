mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use bestprox::bpp_solver::{enumerate_bpps, iterate_orbit, solve_bpp, x_t2_a_set, BppOptions, TOL_BPP};
use bestprox::cyclic_contraction::{
    contraction_bound, m_value, verify_g_cyclic_contraction, ContractionOptions, GaugeSpec, PairSelection,
};
use bestprox::metric_graph::{component_of, has_property_uc, pair_distance, PointId};
use bestprox::par::Execution;

use common::{arb_space, arb_space_and_map, filtered};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn components_are_reflexive_and_symmetric(space in arb_space()) {
        let classes: Vec<BTreeSet<PointId>> = (0..space.len()).map(|x| component_of(&space, x).unwrap()).collect();
        for x in 0..space.len() {
            prop_assert!(classes[x].contains(&x));
            for y in 0..space.len() {
                prop_assert_eq!(classes[x].contains(&y), classes[y].contains(&x));
                if classes[x].contains(&y) {
                    prop_assert_eq!(&classes[x], &classes[y]);
                }
            }
        }
    }

    #[test]
    fn pair_distance_is_relabelling_invariant(space in arb_space(), shift in 0usize..8, flip in any::<bool>()) {
        let n = space.len();
        let mut perm: Vec<PointId> = (0..n).map(|i| (i + shift) % n).collect();
        if flip {
            perm.reverse();
        }
        let g = pair_distance(&space).unwrap();
        let h = pair_distance(&space.permuted(&perm)).unwrap();
        prop_assert_eq!(g.d_ab, h.d_ab);
        let back = |s: &BTreeSet<PointId>| s.iter().map(|&i| perm[i]).collect::<BTreeSet<_>>();
        prop_assert_eq!(&back(&h.a0), &g.a0);
        prop_assert_eq!(&back(&h.b0), &g.b0);
    }

    #[test]
    fn property_uc_makes_partners_injective(space in arb_space()) {
        let geom = pair_distance(&space).unwrap();
        if has_property_uc(&space, &geom).holds() {
            for y in space.b_points() {
                let partners = space
                    .a_points()
                    .into_iter()
                    .filter(|&x| (space.dist(x, y) - geom.d_ab).abs() <= 1e-12)
                    .count();
                prop_assert!(partners <= 1, "{} has {} partners", space.label(y), partners);
            }
        }
    }

    #[test]
    fn bound_at_the_proximal_distance_is_exact(
        d_ab in 0.0f64..5.0,
        c1 in 0.01f64..3.0,
        c2 in -3.0f64..3.0,
        which in 0usize..3,
    ) {
        let phi1 = match which {
            0 => GaugeSpec::Linear { c: c1 },
            1 => GaugeSpec::FloorFraction,
            _ => GaugeSpec::Identity,
        };
        let phi2 = GaugeSpec::AffineShift { c: c2 };
        let rhs = contraction_bound(&phi1, &phi2, d_ab, d_ab, d_ab);
        prop_assert!((rhs - d_ab).abs() <= 1e-12 * d_ab.max(1.0));
    }

    #[test]
    fn reports_are_deterministic_and_ordered((space, map) in arb_space_and_map(), all in any::<bool>()) {
        let phi1 = GaugeSpec::Linear { c: 0.3 };
        let phi2 = GaugeSpec::AffineShift { c: 0.0 };
        let mk = |execution| ContractionOptions {
            selection: if all { PairSelection::AllPairs } else { PairSelection::EdgeEligible },
            execution,
            ..ContractionOptions::default()
        };
        let seq = verify_g_cyclic_contraction(&space, &map, &phi1, &phi2, &mk(Execution::Sequential)).unwrap();
        let par = verify_g_cyclic_contraction(&space, &map, &phi1, &phi2, &mk(Execution::Parallel)).unwrap();
        prop_assert_eq!(&seq, &par);
        let keys: Vec<(PointId, PointId)> = seq.violations.iter().map(|v| (v.x, v.y)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        prop_assert_eq!(keys, sorted);
    }

    #[test]
    fn verified_contraction_implies_plain_inequality(seed in any::<u64>()) {
        // generator gauges: φ₁ = 0.2 s, φ₂ = c + s, i.e. a plain contraction with ratio 0.8
        let Some(b) = filtered(seed) else { return Ok(()) };
        let s = &b.space;
        let d_ab = pair_distance(s).unwrap().d_ab;
        for x in s.a_points() {
            for y in s.b_points() {
                let ty = b.map.apply(y);
                if s.has_edge(x, y) || s.has_edge(x, ty) || s.has_edge(ty, x) {
                    let lhs = s.dist(b.map.apply(x), ty);
                    prop_assert!(lhs <= 0.8 * s.dist(x, y) + 0.2 * d_ab + 1e-9);
                    prop_assert!(m_value(s, &b.map, x, y).is_ok());
                }
            }
        }
    }

    #[test]
    fn gaps_never_increase_from_admissible_seeds(seed in any::<u64>()) {
        let Some(b) = filtered(seed) else { return Ok(()) };
        for x in x_t2_a_set(&b.space, &b.map) {
            let orbit = iterate_orbit(&b.space, &b.map, x, 200, 1e-12).unwrap();
            for w in orbit.gaps.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-9);
            }
        }
    }

    #[test]
    fn best_proximity_points_are_admissible_and_periodic(seed in any::<u64>()) {
        let Some(b) = filtered(seed) else { return Ok(()) };
        let admissible = x_t2_a_set(&b.space, &b.map);
        for x in enumerate_bpps(&b.space, &b.map, TOL_BPP).unwrap() {
            prop_assert!(admissible.contains(&x));
            prop_assert_eq!(b.map.apply_twice(x), x);
        }
    }

    #[test]
    fn one_best_proximity_point_per_class(seed in any::<u64>()) {
        let Some(b) = filtered(seed) else { return Ok(()) };
        let admissible: Vec<PointId> = x_t2_a_set(&b.space, &b.map).into_iter().collect();
        for &x in &admissible {
            let class = component_of(&b.space, x).unwrap();
            let px = solve_bpp(&b.space, &b.map, x, &BppOptions::default()).unwrap().bpp;
            prop_assert!(class.contains(&px));
            for &y in admissible.iter().filter(|y| class.contains(y)) {
                prop_assert_eq!(solve_bpp(&b.space, &b.map, y, &BppOptions::default()).unwrap().bpp, px);
            }
        }
    }

    #[test]
    fn even_orbits_settle(seed in any::<u64>()) {
        let Some(b) = filtered(seed) else { return Ok(()) };
        for x in x_t2_a_set(&b.space, &b.map) {
            let mut cur = x;
            for _ in 0..b.space.len() {
                cur = b.map.apply_twice(cur);
            }
            prop_assert_eq!(b.map.apply_twice(cur), cur);
        }
    }

    #[test]
    fn arbitrary_inputs_never_panic((space, map) in arb_space_and_map(), seed in 0usize..8) {
        let x = seed % space.len();
        let _ = iterate_orbit(&space, &map, x, 50, 1e-9);
        let _ = solve_bpp(&space, &map, x, &BppOptions::default());
        let _ = solve_bpp(&space, &map, x, &BppOptions::unchecked());
        let _ = enumerate_bpps(&space, &map, TOL_BPP);
    }
}
