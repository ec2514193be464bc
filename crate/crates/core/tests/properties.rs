use beaconloc::beaconing::{extract_constraints, ExtractionConfig, ObservationLog, StopObservation};
use beaconloc::constraint::AnnulusConstraint;
use beaconloc::geometry::{segment_blocked, ObstaclePolygon, Point2D};
use beaconloc::radio::RadioConfig;
use beaconloc::relay::{backoff_delay, contention_rounds, ContentionConfig};
use beaconloc::scenario::SensorNode;
use proptest::prelude::*;

fn point() -> impl Strategy<Value = Point2D> {
    (0.0..100.0f64, 0.0..100.0f64).prop_map(|(x, y)| Point2D::new(x, y))
}

fn contention(alpha: f64) -> ContentionConfig {
    ContentionConfig {
        alpha,
        beta: 1.0 - alpha,
        ..ContentionConfig::default()
    }
}

fn sensor(id: u32, p: Point2D, used: f64, neighbors: usize) -> SensorNode {
    SensorNode {
        used_energy: used,
        num_neighbors: neighbors,
        ..SensorNode::new(id, p)
    }
}

proptest! {
    #[test]
    fn backoff_is_bounded_and_monotone(
        alpha in 0.0..=1.0f64,
        used in 0.0..=1.0f64,
        less in 0.0..=1.0f64,
        neighbors in 1usize..50,
        more in 0usize..20,
    ) {
        let cfg = contention(alpha);
        let d = backoff_delay(&sensor(1, Point2D::ORIGIN, used, neighbors), &cfg).unwrap();
        prop_assert!((0.0..=cfg.max_delay * (1.0 + 1e-12)).contains(&d));
        let fresher = backoff_delay(&sensor(1, Point2D::ORIGIN, used * less, neighbors), &cfg).unwrap();
        prop_assert!(fresher <= d);
        let crowded = backoff_delay(&sensor(1, Point2D::ORIGIN, used, neighbors + more), &cfg).unwrap();
        prop_assert!(crowded <= d);
    }

    #[test]
    fn contention_ignores_candidate_order(
        nodes in prop::collection::vec((point(), 0.0..1.0f64, 0usize..8), 1..8),
        rotate in 0usize..8,
    ) {
        let cands: Vec<SensorNode> = nodes
            .iter()
            .enumerate()
            .map(|(i, &(p, used, nb))| sensor(i as u32 + 1, p, used, nb))
            .collect();
        let cfg = contention(0.5);
        let wall = ObstaclePolygon::square(Point2D::new(50.0, 50.0), 20.0).unwrap();
        let reference = contention_rounds(0, &cands, &cfg, std::slice::from_ref(&wall));
        let mut shuffled = cands.clone();
        shuffled.rotate_left(rotate % cands.len());
        shuffled.reverse();
        prop_assert_eq!(&reference, &contention_rounds(0, &shuffled, &cfg, &[wall]));
        // every eligible candidate either wins a round or is suppressed exactly once
        let eligible = cands.iter().filter(|n| n.num_neighbors > 0).count();
        let covered: usize = reference.iter().map(|e| 1 + e.suppressed_node_ids.len()).sum();
        prop_assert_eq!(eligible, covered);
    }

    #[test]
    fn extraction_is_per_stop(
        heard in prop::collection::vec(prop::collection::btree_set(0usize..3, 0..=3), 1..12),
        rotate in 0usize..12,
    ) {
        let radio = RadioConfig { level_ranges: vec![10.0, 20.0, 30.0], doi: 0.0, fading_f: 0.0 };
        let stops: Vec<StopObservation> = heard
            .iter()
            .enumerate()
            .map(|(i, h)| StopObservation {
                stop_index: i,
                position: Point2D::new(i as f64, 0.0),
                heard: h.iter().copied().collect(),
                relayed: Vec::new(),
            })
            .collect();
        let log = ObservationLog { node_id: 1, stops: stops.clone() };
        let x = ExtractionConfig::default();
        let out = extract_constraints(&log, &radio, &x);
        prop_assert!(out.len() <= stops.len());
        prop_assert_eq!(out.len(), heard.iter().filter(|h| !h.is_empty()).count());
        for c in &out {
            prop_assert!(c.lower() < c.upper().unwrap());
        }
        let mut permuted = stops;
        let k = rotate % permuted.len();
        permuted.rotate_left(k);
        let moved = extract_constraints(&ObservationLog { node_id: 1, stops: permuted }, &radio, &x);
        let mut a: Vec<String> = out.iter().map(|c| c.to_string()).collect();
        let mut b: Vec<String> = moved.iter().map(|c| c.to_string()).collect();
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn blocking_is_symmetric(p in point(), q in point()) {
        let obstacles = [
            ObstaclePolygon::square(Point2D::new(50.0, 50.0), 20.0).unwrap(),
            ObstaclePolygon::new(vec![Point2D::new(10.0, 10.0), Point2D::new(30.0, 15.0), Point2D::new(15.0, 35.0)]).unwrap(),
        ];
        prop_assert_eq!(segment_blocked(p, q, &obstacles), segment_blocked(q, p, &obstacles));
    }

    #[test]
    fn constraint_text_round_trip(
        c in point(),
        lower in 0.0..50.0f64,
        width in prop::option::of(0.1..50.0f64),
    ) {
        let lower = if width.is_none() { lower + 0.5 } else { lower };
        let a = AnnulusConstraint::new(c, lower, width.map(|w| lower + w)).unwrap();
        let b: AnnulusConstraint = a.to_string().parse().unwrap();
        prop_assert_eq!(a, b);
    }
}
