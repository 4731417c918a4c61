mod support;

use beampredict_core::raytracer::{specular_residual, Tracer};
use proptest::prelude::*;
use support::scenes;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-7
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn paths_are_reciprocal(seed in any::<u64>()) {
        let (s, tx, rxs) = scenes::random_scene(seed, 1);
        let rx = rxs[0];
        let fwd = Tracer::new(&s, tx).trace_to(rx);
        let mut back = Tracer::new(&s, rx).trace_to(tx);
        prop_assert_eq!(fwd.len(), back.len());
        for p in &fwd {
            let rev: Vec<usize> = p.faces.iter().rev().copied().collect();
            let i = back.iter().position(|q| q.faces == rev);
            prop_assert!(i.is_some(), "no reverse of {:?}", p.faces);
            let q = back.swap_remove(i.unwrap());
            prop_assert!(close(p.path_loss_db, q.path_loss_db));
            prop_assert!(close(p.length_m, q.length_m));
            prop_assert!(close(p.aod.0, q.aoa.0) || close((p.aod.0 - q.aoa.0).abs(), 360.0));
            prop_assert!(close(p.aod.1, q.aoa.1) && close(p.aoa.1, q.aod.1));
            prop_assert!(close(p.aoa.0, q.aod.0) || close((p.aoa.0 - q.aod.0).abs(), 360.0));
        }
    }

    #[test]
    fn every_bounce_is_specular(seed in any::<u64>()) {
        let (s, tx, rxs) = scenes::random_scene(seed, 4);
        let t = Tracer::new(&s, tx);
        for rx in rxs {
            for p in t.trace_to(rx) {
                prop_assert!(specular_residual(&p, t.faces()) < 1e-9);
                prop_assert_eq!(p.bounces, p.faces.len());
                prop_assert_eq!(p.vertices.len(), p.bounces + 2);
            }
        }
    }

    #[test]
    fn more_reflections_never_remove_a_path(seed in any::<u64>()) {
        let (s, tx, rxs) = scenes::random_scene(seed, 2);
        for rx in rxs {
            let mut prev: Vec<Vec<usize>> = Vec::new();
            for k in 0..=4 {
                let cur: Vec<Vec<usize>> = Tracer::with_max_reflections(&s, tx, k).trace_to(rx).into_iter().map(|p| p.faces).collect();
                for f in &prev {
                    prop_assert!(cur.contains(f), "max_reflections {}: lost {:?}", k, f);
                }
                prop_assert!(cur.iter().all(|f| f.len() <= k));
                prev = cur;
            }
        }
    }
}
