use beampredict_core::geometry::{Rect, Vec2};
use beampredict_core::scenario::{generate_synthetic_city, CityParams, Scenario};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = CityParams> {
    (any::<u64>(), 100.0f64..250.0, 0usize..10, 1usize..5, prop_oneof![Just(1.0), Just(2.0), Just(2.5)]).prop_map(
        |(seed, side, buildings, gnbs, res)| CityParams {
            area: Rect::new(Vec2::new(0.0, 0.0), Vec2::new(side, side)),
            building_count: buildings,
            building_size_range: (10.0, 30.0),
            gnb_count: gnbs,
            min_gnb_spacing_m: 20.0,
            grid_resolution_m: res,
            seed,
            ..CityParams::default()
        },
    )
}

/// Lattice points strictly inside no footprint, counted by brute force on
/// the axis-aligned rectangles the generator produces.
fn brute_force_grid_count(s: &Scenario) -> usize {
    let r = s.grid_resolution_m;
    let nx = ((s.area.width() / r) + 1e-9).floor() as usize + 1;
    let ny = ((s.area.height() / r) + 1e-9).floor() as usize + 1;
    let mut n = 0;
    for iy in 0..ny {
        for ix in 0..nx {
            let (x, y) = (s.area.min.x + ix as f64 * r, s.area.min.y + iy as f64 * r);
            let inside = s.buildings.iter().any(|b| {
                let xs = b.vertices.iter().map(|v| v.x);
                let ys = b.vertices.iter().map(|v| v.y);
                let (x0, x1) = (xs.clone().fold(f64::INFINITY, f64::min), xs.fold(f64::NEG_INFINITY, f64::max));
                let (y0, y1) = (ys.clone().fold(f64::INFINITY, f64::min), ys.fold(f64::NEG_INFINITY, f64::max));
                x0 < x && x < x1 && y0 < y && y < y1
            });
            n += usize::from(!inside);
        }
    }
    n
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_cities_are_valid(p in params()) {
        if let Ok(s) = generate_synthetic_city(&p) {
            prop_assert!(s.violations().is_empty(), "{:?}", s.violations());
            prop_assert_eq!(s.gnbs.len(), p.gnb_count);
            prop_assert_eq!(s.buildings.len(), p.building_count);
            prop_assert_eq!(s.ue_grid().len(), brute_force_grid_count(&s));
            for g in &s.gnbs {
                prop_assert!(s.area.contains(g.position.xy()));
                prop_assert!(!s.inside_building(g.position.xy()));
            }
        }
    }

    #[test]
    fn generation_is_deterministic(p in params()) {
        let a = generate_synthetic_city(&p);
        let b = generate_synthetic_city(&p);
        prop_assert_eq!(a.is_ok(), b.is_ok());
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert_eq!(a.fingerprint(), b.fingerprint());
            prop_assert_eq!(a, b);
        }
    }
}

#[test]
fn distinct_seeds_give_distinct_cities() {
    let mut prints = std::collections::BTreeSet::new();
    for seed in 0..50 {
        let p = CityParams {
            area: Rect::new(Vec2::new(0.0, 0.0), Vec2::new(200.0, 200.0)),
            building_count: 6,
            building_size_range: (10.0, 30.0),
            gnb_count: 2,
            min_gnb_spacing_m: 20.0,
            seed,
            ..CityParams::default()
        };
        prints.insert(generate_synthetic_city(&p).unwrap().fingerprint());
    }
    assert_eq!(prints.len(), 50);
}
