//! Seeded random finite instances that pass the standing hypotheses.
//!
//! Each instance is a union of well-separated classes on the two vertical
//! lines of the `ℓ₁` plane. A class has a centre height and a few levels
//! `centre ± 3⁻ˡ`; every height carries an `A` point and a `B` point at
//! distance 1. Inside a class, each side is ordered by closeness to the
//! centre (an edge from every point to every point at least as close), and
//! partners are joined both ways. The map crosses sides and moves one or
//! two levels towards the centre, or jumps straight to it. Candidates that
//! fail any hypothesis filter are discarded.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::CyclicBundle;
use crate::cyclic_contraction::{verify_with_geometry, ContractionOptions, CyclicMap, GaugeSpec};
use crate::metric_graph::{
    check_property_star, has_property_uc, is_sharp_proximal, pair_distance, CoordMetric, PointId, Scope, Side,
    SpaceBuilder,
};

const CLASS_SPACING: f64 = 10.0;
const LEVEL_RATIO: f64 = 1.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthConfig {
    /// Upper bound on the number of points (both sides together).
    pub max_points: usize,
    pub max_classes: usize,
    /// Give up after this many rejected candidates per accepted instance.
    pub max_attempts_per_instance: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            max_points: 12,
            max_classes: 3,
            max_attempts_per_instance: 50,
        }
    }
}

struct Height {
    class: usize,
    level: usize,
    value: f64,
    /// Index of the height the map sends this one to.
    target: usize,
}

/// One unfiltered candidate.
pub fn random_candidate(rng: &mut impl Rng, cfg: &SynthConfig) -> CyclicBundle {
    let budget = (cfg.max_points / 2).max(1);
    let classes = rng.gen_range(1..=cfg.max_classes.clamp(1, budget));
    let mut sizes = vec![1usize; classes];
    for _ in classes..rng.gen_range(classes..=budget) {
        let c = rng.gen_range(0..classes);
        sizes[c] += 1;
    }

    let mut heights: Vec<Height> = Vec::new();
    for (class, &size) in sizes.iter().enumerate() {
        let centre = CLASS_SPACING * class as f64;
        let first = heights.len();
        for level in 0..size {
            let value = if level == 0 {
                centre
            } else {
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                centre + sign * LEVEL_RATIO.powi(level as i32)
            };
            let target = if level == 0 || rng.gen_bool(0.2) {
                first
            } else {
                let step = rng.gen_range(1..=2);
                if level + step < size {
                    first + level + step
                } else {
                    first
                }
            };
            heights.push(Height {
                class,
                level,
                value,
                target,
            });
        }
    }

    // shuffle point ids so nothing depends on construction order
    let k = heights.len();
    let mut slots: Vec<(usize, bool)> = (0..k).flat_map(|h| [(h, false), (h, true)]).collect();
    slots.shuffle(rng);
    let mut id_of = vec![[0; 2]; k];
    for (id, &(h, on_b)) in slots.iter().enumerate() {
        id_of[h][on_b as usize] = id;
    }

    let mut builder = SpaceBuilder::new();
    for &(h, on_b) in &slots {
        let side = if on_b { Side::B } else { Side::A };
        let name = if on_b { 'b' } else { 'a' };
        builder.add_point_at(
            format!("{name}{}.{}", heights[h].class, heights[h].level),
            side,
            vec![on_b as u8 as f64, heights[h].value],
        );
    }
    let spread = |h: &Height| (h.value - CLASS_SPACING * h.class as f64).abs();
    for (i, hi) in heights.iter().enumerate() {
        builder.add_edge(id_of[i][0], id_of[i][1]);
        builder.add_edge(id_of[i][1], id_of[i][0]);
        for (j, hj) in heights.iter().enumerate() {
            if hi.class == hj.class && spread(hj) <= spread(hi) {
                builder.add_edge(id_of[i][0], id_of[j][0]);
                builder.add_edge(id_of[i][1], id_of[j][1]);
            }
        }
    }
    let space = builder
        .build_with_metric(CoordMetric::L1, true)
        .expect("generated points have distinct labels and valid ids");
    let mut image = vec![0; 2 * k];
    for (h, height) in heights.iter().enumerate() {
        image[id_of[h][0]] = id_of[height.target][1];
        image[id_of[h][1]] = id_of[height.target][0];
    }
    let map = CyclicMap::new(&space, image).expect("map crosses sides by construction");
    CyclicBundle {
        space,
        map,
        phi1: GaugeSpec::Linear { c: 0.2 },
        phi2: GaugeSpec::AffineShift { c: 1.0 },
        truncation_boundary: Default::default(),
    }
}

/// Property UC, transitivity on `A`, sharp proximality and a verified
/// contraction.
pub fn passes_filters(bundle: &CyclicBundle) -> bool {
    let space = &bundle.space;
    let Ok(geom) = pair_distance(space) else {
        return false;
    };
    if !(has_property_uc(space, &geom).holds()
        && check_property_star(space, Scope::A).holds()
        && is_sharp_proximal(space, &geom).holds())
    {
        return false;
    }
    verify_with_geometry(space, &geom, &bundle.map, &bundle.phi1, &bundle.phi2, &ContractionOptions::default())
        .is_ok_and(|r| r.is_contraction())
}

/// `count` filtered instances from a fixed seed, plus the number of
/// candidates rejected along the way.
pub fn generate(seed: u64, count: usize, cfg: &SynthConfig) -> (Vec<CyclicBundle>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut rejected = 0;
    let limit = count.saturating_mul(cfg.max_attempts_per_instance.max(1));
    while out.len() < count && out.len() + rejected < limit {
        let candidate = random_candidate(&mut rng, cfg);
        if passes_filters(&candidate) {
            out.push(candidate);
        } else {
            rejected += 1;
        }
    }
    (out, rejected)
}

/// Level-0 points of `A`, recovered from the labels.
pub fn centre_points(bundle: &CyclicBundle) -> Vec<PointId> {
    bundle
        .space
        .a_points()
        .into_iter()
        .filter(|&x| bundle.space.label(x).ends_with(".0"))
        .collect()
}
