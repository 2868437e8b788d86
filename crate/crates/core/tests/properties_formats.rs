mod common;

use proptest::prelude::*;

use bestprox::corpus::{reproduce, ExampleId, ExampleParams};
use bestprox::formats::{
    map_doc, parse_gauges, parse_instance, parse_map, parse_pbvp, GaugeDoc, InstanceDoc, Strictness, SCHEMA,
};
use bestprox::metric_graph::PointId;

use common::candidate;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parsers_never_panic(text in ".{0,200}") {
        for strictness in [Strictness::Strict, Strictness::Warn] {
            let _ = parse_instance(&text, strictness);
            let _ = parse_gauges(&text, strictness);
            let _ = parse_pbvp(&text, strictness);
        }
    }

    #[test]
    fn json_shaped_garbage_never_panics(
        metric in prop::sample::select(vec!["l1", "l2", "sup", "table", "bogus"]),
        coords in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 0..3), 0..4),
        sides in prop::collection::vec(prop::sample::select(vec!["A", "B", "AB", "C"]), 0..4),
        edges in prop::collection::vec((0usize..5, 0usize..5), 0..6),
        loops in any::<bool>(),
    ) {
        let points: Vec<_> = coords
            .iter()
            .zip(&sides)
            .enumerate()
            .map(|(i, (c, s))| serde_json::json!({ "label": format!("p{i}"), "side": s, "coords": c }))
            .collect();
        let edges: Vec<_> = edges.iter().map(|(a, b)| (format!("p{a}"), format!("p{b}"))).collect();
        let doc = serde_json::json!({
            "schema": SCHEMA, "metric": metric, "points": points, "edges": edges, "auto_loops": loops,
        });
        let _ = parse_instance(&doc.to_string(), Strictness::Warn);
    }

    #[test]
    fn generated_instances_round_trip(seed in any::<u64>()) {
        let b = candidate(seed);
        let text = serde_json::to_string(&InstanceDoc::from_space(&b.space)).unwrap();
        let back = parse_instance(&text, Strictness::Strict).unwrap();
        prop_assert!(back.warnings.is_empty());
        let s = back.value;
        prop_assert_eq!(s.labels(), b.space.labels());
        prop_assert_eq!(s.distance_table(), b.space.distance_table());
        let edges: Vec<(PointId, PointId)> = s.edges().collect();
        prop_assert_eq!(edges, b.space.edges().collect::<Vec<_>>());
        for x in 0..s.len() {
            prop_assert_eq!(s.side(x), b.space.side(x));
        }

        let map_text = serde_json::to_string(&map_doc(&b.space, &b.map)).unwrap();
        let map = parse_map(&map_text, &s, Strictness::Strict).unwrap().value;
        prop_assert_eq!(map.image(), b.map.image());

        let gauges = GaugeDoc { schema: SCHEMA.into(), phi1: Some(b.phi1.clone()), phi2: Some(b.phi2.clone()), psi: None };
        let g_text = serde_json::to_string(&gauges).unwrap();
        prop_assert_eq!(parse_gauges(&g_text, Strictness::Strict).unwrap().value, gauges);
    }
}

#[test]
fn corpus_reports_are_deterministic() {
    for id in ExampleId::ALL {
        let a = serde_json::to_string(&reproduce(id, &ExampleParams::default()).unwrap()).unwrap();
        let b = serde_json::to_string(&reproduce(id, &ExampleParams::default()).unwrap()).unwrap();
        assert_eq!(a, b, "{id}");
    }
}
