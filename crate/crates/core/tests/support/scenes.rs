//! Random planar scenes and the tracer-versus-oracle comparison.

use beampredict_core::geometry::{Rect, Vec2, Vec3};
use beampredict_core::raytracer::{self, Tracer};
use beampredict_core::rng::rng_from_seed;
use beampredict_core::scenario::{Building, Scenario};
use rand::Rng;

use super::ray_launch::{self, angle_diff_deg};

pub const TX_Z: f64 = 10.0;
pub const RX_Z: f64 = 1.5;
pub const LENGTH_TOL_M: f64 = 0.1;
pub const ANGLE_TOL_DEG: f64 = 0.2;
pub const SPECULAR_TOL_RAD: f64 = 1e-9;

/// One to three non-overlapping rectangular buildings, all taller than the
/// transmitter, plus a transmitter and `receivers` receivers outside them.
pub fn random_scene(seed: u64, receivers: usize) -> (Scenario, Vec3, Vec<Vec3>) {
    let mut rng = rng_from_seed(seed);
    let area = Rect::new(Vec2::new(0.0, 0.0), Vec2::new(100.0, 100.0));
    let mut s = Scenario::open_field(area, vec![]);
    let count = rng.random_range(1..=3);
    while s.buildings.len() < count {
        let w = rng.random_range(5.0..30.0);
        let h = rng.random_range(5.0..30.0);
        let x = rng.random_range(5.0..95.0 - w);
        let y = rng.random_range(5.0..95.0 - h);
        let b = Building::rect(Vec2::new(x, y), Vec2::new(x + w, y + h), rng.random_range(15.0..40.0));
        let grown = Rect::new(Vec2::new(x - 2.0, y - 2.0), Vec2::new(x + w + 2.0, y + h + 2.0));
        if s.buildings.iter().all(|o| !o.bounds().overlaps(&grown)) {
            s.buildings.push(b);
        }
    }
    let mut free_point = |z: f64| loop {
        let p = Vec2::new(rng.random_range(1.0..99.0), rng.random_range(1.0..99.0));
        let clear = s.buildings.iter().all(|b| {
            let r = b.bounds();
            !Rect::new(r.min - Vec2::new(0.5, 0.5), r.max + Vec2::new(0.5, 0.5)).contains(p)
        });
        if clear {
            break p.extend(z);
        }
    };
    let tx = free_point(TX_Z);
    let rx = (0..receivers).map(|_| free_point(RX_Z)).collect();
    (s, tx, rx)
}

pub fn footprints(s: &Scenario) -> Vec<Vec<[f64; 2]>> {
    s.buildings
        .iter()
        .map(|b| b.vertices.iter().map(|v| [v.x, v.y]).collect())
        .collect()
}

#[derive(Debug, Default, Clone, Copy)]
pub struct Comparison {
    pub paths: usize,
    pub max_length_err: f64,
    pub max_angle_err: f64,
    pub max_specular: f64,
}

/// Compares image-method paths from `tx` to `rx` with ray launching.
pub fn compare(s: &Scenario, tx: Vec3, rx: Vec3) -> Result<Comparison, String> {
    let tracer = Tracer::new(s, tx);
    let mut image = tracer.trace_to(rx);
    image.sort_by(|a, b| a.bounces.cmp(&b.bounces).then_with(|| a.faces.cmp(&b.faces)));
    let walls = ray_launch::walls(&footprints(s));
    let oracle = ray_launch::launch(&walls, [tx.x, tx.y], [rx.x, rx.y], s.rf.max_reflections);
    if image.len() != oracle.len() {
        let a: Vec<_> = image.iter().map(|p| p.faces.clone()).collect();
        let b: Vec<_> = oracle.iter().map(|p| p.walls.clone()).collect();
        return Err(format!("tx {tx:?} rx {rx:?}: image method {a:?}, ray launching {b:?}"));
    }
    let dz = rx.z - tx.z;
    let mut c = Comparison {
        paths: image.len(),
        ..Comparison::default()
    };
    for (p, o) in image.iter().zip(&oracle) {
        if p.faces != o.walls {
            return Err(format!("wall sequence {:?} vs {:?}", p.faces, o.walls));
        }
        c.max_length_err = c.max_length_err.max((p.length_m - o.length_3d(dz)).abs());
        let (oaz, oel) = o.aod_deg(dz);
        let (raz, rel) = o.aoa_deg(dz);
        for e in [
            angle_diff_deg(p.aod.0, oaz),
            (p.aod.1 - oel).abs(),
            angle_diff_deg(p.aoa.0, raz),
            (p.aoa.1 - rel).abs(),
        ] {
            c.max_angle_err = c.max_angle_err.max(e);
        }
        c.max_specular = c.max_specular.max(raytracer::specular_residual(p, tracer.faces()));
    }
    Ok(c)
}
