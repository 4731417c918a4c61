mod support;

use beampredict_core::geometry::{Rect, Vec2, Vec3};
use beampredict_core::raytracer::PathKind;
use beampredict_core::scenario::{Building, Scenario};
use support::scenes::{self, ANGLE_TOL_DEG, LENGTH_TOL_M, SPECULAR_TOL_RAD};

#[test]
fn image_method_matches_ray_launching_on_random_scenes() {
    let mut total = 0;
    for seed in 0..20 {
        let (s, tx, rxs) = scenes::random_scene(1000 + seed, 3);
        for rx in rxs {
            let c = scenes::compare(&s, tx, rx).unwrap_or_else(|e| panic!("scene {seed}: {e}"));
            assert!(c.max_length_err <= LENGTH_TOL_M, "scene {seed}: {c:?}");
            assert!(c.max_angle_err <= ANGLE_TOL_DEG, "scene {seed}: {c:?}");
            assert!(c.max_specular < SPECULAR_TOL_RAD, "scene {seed}: {c:?}");
            total += c.paths;
        }
    }
    // Sanity: the scenes exercise reflections, not just LoS.
    assert!(total > 60, "{total}");
}

#[test]
fn long_wall_gives_los_plus_mirror_path() {
    let mut s = Scenario::open_field(Rect::new(Vec2::new(-500.0, -500.0), Vec2::new(500.0, 500.0)), vec![]);
    s.buildings.push(Building::rect(Vec2::new(-400.0, 30.0), Vec2::new(400.0, 60.0), 40.0));
    let tx = Vec3::new(0.0, 0.0, 10.0);
    let rx = Vec3::new(40.0, 10.0, 1.5);
    let c = scenes::compare(&s, tx, rx).unwrap();
    assert_eq!(c.paths, 2);
    assert!(c.max_length_err < 1e-6 && c.max_angle_err < 1e-6 && c.max_specular < 1e-12, "{c:?}");
    let paths = beampredict_core::raytracer::trace_points(&s, tx, rx);
    assert_eq!(paths[0].kind, PathKind::LoS);
    assert_eq!(paths[1].bounces, 1);
}

#[test]
fn wall_pair_produces_multi_bounce_paths() {
    // Two parallel walls: a street canyon with bounces up to the limit.
    let mut s = Scenario::open_field(Rect::new(Vec2::new(-200.0, -200.0), Vec2::new(200.0, 200.0)), vec![]);
    s.buildings.push(Building::rect(Vec2::new(-150.0, 10.0), Vec2::new(150.0, 20.0), 30.0));
    s.buildings.push(Building::rect(Vec2::new(-150.0, -20.0), Vec2::new(150.0, -10.0), 30.0));
    let c = scenes::compare(&s, Vec3::new(-40.0, 3.0, 10.0), Vec3::new(50.0, -4.0, 1.5)).unwrap();
    // LoS plus two sequences for each bounce count 1..=4.
    assert_eq!(c.paths, 1 + 2 * 4);
    assert!(c.max_length_err < 1e-6 && c.max_specular < 1e-9, "{c:?}");
}
