//! Line-of-sight and specular wall reflections by the image method.
//!
//! Reflections happen only on vertical building walls; roofs and ground
//! block but never reflect. Walls are finite: a reflection point must lie on
//! the wall segment and below the roof. Every leg of a path is checked
//! against every building with the closed-solid convention, so grazing a
//! wall or a roof edge blocks.
//!
//! A [`Tracer`] precomputes the image tree of one transmitter. Each node
//! holds the mirrored source and the part of its wall that the parent beam
//! can reach, so a receiver query only backtracks through nodes whose beam
//! contains it.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::geometry::{self, Rect, Vec2, Vec3};
use crate::math;
use crate::scenario::{GnbSite, Scenario};
use crate::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Free-space path loss, dB.
pub fn fspl_db(distance_m: f64, frequency_hz: f64) -> Result<f64> {
    if !(distance_m > 0.0 && distance_m.is_finite()) {
        return Err(Error::Domain(alloc::format!("distance must be > 0, got {distance_m}")));
    }
    if !(frequency_hz > 0.0 && frequency_hz.is_finite()) {
        return Err(Error::Domain(alloc::format!("frequency must be > 0, got {frequency_hz}")));
    }
    Ok(20.0 * math::log10(4.0 * core::f64::consts::PI * distance_m * frequency_hz / SPEED_OF_LIGHT))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathKind {
    LoS,
    NLoS,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationPath {
    pub kind: PathKind,
    /// `(azimuth_deg, elevation_deg)` of departure, seen from the transmitter.
    pub aod: (f64, f64),
    /// `(azimuth_deg, elevation_deg)` of arrival: direction from the receiver
    /// back towards the last interaction point.
    pub aoa: (f64, f64),
    pub path_loss_db: f64,
    pub length_m: f64,
    pub bounces: usize,
    /// Transmitter, reflection points, receiver.
    pub vertices: Vec<Vec3>,
    /// Wall index of each reflection, in travel order.
    pub faces: Vec<usize>,
}

/// One vertical wall: a footprint edge extruded to the building height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub building: usize,
    pub a: Vec2,
    pub b: Vec2,
    /// Outward unit normal.
    pub normal: Vec2,
    pub height: f64,
}

impl Face {
    /// Signed distance of `p` from the wall plane, positive on the outside.
    #[inline]
    pub fn side(&self, p: Vec2) -> f64 {
        self.normal.dot(p - self.a)
    }

    #[inline]
    pub fn mirror(&self, p: Vec2) -> Vec2 {
        p - self.normal * (2.0 * self.side(p))
    }
}

/// All walls of a scenario, indexed building by building, edge by edge.
pub fn faces(scenario: &Scenario) -> Vec<Face> {
    let mut out = Vec::new();
    for (bi, b) in scenario.buildings.iter().enumerate() {
        let n = b.vertices.len();
        for i in 0..n {
            let a = b.vertices[i];
            let c = b.vertices[(i + 1) % n];
            out.push(Face {
                building: bi,
                a,
                b: c,
                normal: (c - a).perp_cw().normalized(),
                height: b.height_m,
            });
        }
    }
    out
}

/// Segment `a -> b` touches no building (faces and roofs, closed).
pub fn line_of_sight(scenario: &Scenario, a: Vec3, b: Vec3) -> bool {
    let seg = Rect::of_segment(a.xy(), b.xy());
    let zmin = a.z.min(b.z);
    scenario.buildings.iter().all(|bld| {
        zmin > bld.height_m || !seg.overlaps(&bld.bounds()) || !geometry::segment_hits_prism(&bld.vertices, bld.height_m, a, b, 0.0, 1.0)
    })
}

#[derive(Debug, Clone, Copy)]
struct Node {
    parent: Option<usize>,
    face: usize,
    image: Vec2,
    /// Reachable part of the wall; `w0` is clockwise of `w1` seen from `image`.
    w0: Vec2,
    w1: Vec2,
}

const BEAM_TOL: f64 = 1e-7;

/// Image tree of one transmitter.
pub struct Tracer<'a> {
    scenario: &'a Scenario,
    tx: Vec3,
    faces: Vec<Face>,
    bounds: Vec<Rect>,
    nodes: Vec<Node>,
}

impl<'a> Tracer<'a> {
    pub fn new(scenario: &'a Scenario, tx: Vec3) -> Self {
        Self::with_max_reflections(scenario, tx, scenario.rf.max_reflections)
    }

    pub fn with_max_reflections(scenario: &'a Scenario, tx: Vec3, max_reflections: usize) -> Self {
        let faces = faces(scenario);
        let bounds = scenario.buildings.iter().map(|b| b.bounds()).collect();
        let mut nodes: Vec<Node> = Vec::new();
        if max_reflections > 0 {
            let src = tx.xy();
            for (fi, f) in faces.iter().enumerate() {
                if f.side(src) > 0.0 {
                    let (w0, w1) = ordered_window(f.mirror(src), f.a, f.b);
                    nodes.push(Node {
                        parent: None,
                        face: fi,
                        image: f.mirror(src),
                        w0,
                        w1,
                    });
                }
            }
            let mut start = 0;
            for _depth in 2..=max_reflections {
                let end = nodes.len();
                for ni in start..end {
                    let parent = nodes[ni];
                    let pf = faces[parent.face];
                    for (fi, f) in faces.iter().enumerate() {
                        if fi == parent.face || f.side(parent.image) <= 0.0 {
                            continue;
                        }
                        if let Some((c0, c1)) = clip_to_beam(&parent, &pf, f) {
                            let image = f.mirror(parent.image);
                            let (w0, w1) = ordered_window(image, c0, c1);
                            nodes.push(Node {
                                parent: Some(ni),
                                face: fi,
                                image,
                                w0,
                                w1,
                            });
                        }
                    }
                }
                start = end;
            }
        }
        Self {
            scenario,
            tx,
            faces,
            bounds,
            nodes,
        }
    }

    pub fn tx(&self) -> Vec3 {
        self.tx
    }

    /// Number of image-tree nodes (candidate reflection sequences).
    pub fn image_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    /// All valid paths to `rx`, sorted by ascending path loss.
    pub fn trace_to(&self, rx: Vec3) -> Vec<PropagationPath> {
        let rf = &self.scenario.rf;
        let mut out = Vec::new();
        if self.clear(self.tx, rx, None, None) {
            if let Some(p) = self.make_path(&[self.tx, rx], Vec::new(), rf) {
                out.push(p);
            }
        }
        let p2 = rx.xy();
        let mut chain: Vec<usize> = Vec::with_capacity(rf.max_reflections);
        for (ni, node) in self.nodes.iter().enumerate() {
            if !in_beam(node, &self.faces[node.face], p2) {
                continue;
            }
            chain.clear();
            let mut cur = Some(ni);
            while let Some(c) = cur {
                chain.push(c);
                cur = self.nodes[c].parent;
            }
            // chain: deepest first.
            if let Some(path) = self.validate(&chain, rx) {
                out.push(path);
            }
        }
        out.sort_by(|a, b| {
            a.path_loss_db
                .partial_cmp(&b.path_loss_db)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.faces.cmp(&b.faces))
        });
        out
    }

    fn validate(&self, chain: &[usize], rx: Vec3) -> Option<PropagationPath> {
        let n = chain.len();
        // Backtrack in 2D from the receiver through each image.
        let mut pts2 = vec![Vec2::default(); n];
        let mut target = rx.xy();
        for (k, &ni) in chain.iter().enumerate() {
            let node = &self.nodes[ni];
            let f = &self.faces[node.face];
            let hit = segment_line_hit(node.image, target, f)?;
            pts2[n - 1 - k] = hit;
            target = hit;
        }
        let face_ids: Vec<usize> = chain.iter().rev().map(|&ni| self.nodes[ni].face).collect();
        // Proper reflections: both neighbours strictly outside each wall.
        for k in 0..n {
            let f = &self.faces[face_ids[k]];
            let prev = if k == 0 { self.tx.xy() } else { pts2[k - 1] };
            let next = if k + 1 == n { rx.xy() } else { pts2[k + 1] };
            if !(f.side(prev) > 0.0 && f.side(next) > 0.0) {
                return None;
            }
        }
        // Heights along the unfolded path.
        let mut cum = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        let mut last = self.tx.xy();
        for p in &pts2 {
            acc += (*p - last).norm();
            cum.push(acc);
            last = *p;
        }
        let total = acc + (rx.xy() - last).norm();
        if !(total > 0.0) {
            return None;
        }
        let dz = rx.z - self.tx.z;
        let mut verts = Vec::with_capacity(n + 2);
        verts.push(self.tx);
        for k in 0..n {
            let z = self.tx.z + dz * cum[k] / total;
            let f = &self.faces[face_ids[k]];
            if !(z >= 0.0 && z <= f.height) {
                return None;
            }
            verts.push(pts2[k].extend(z));
        }
        verts.push(rx);
        for k in 0..=n {
            let skip_a = if k == 0 { None } else { Some(self.faces[face_ids[k - 1]].building) };
            let skip_b = if k == n { None } else { Some(self.faces[face_ids[k]].building) };
            if !self.clear(verts[k], verts[k + 1], skip_a, skip_b) {
                return None;
            }
        }
        self.make_path(&verts, face_ids, &self.scenario.rf)
    }

    /// Leg `a -> b` is unobstructed. Buildings owning the reflecting wall at
    /// either endpoint are skipped: a leg leaving or reaching a wall of a
    /// convex building cannot cross that building.
    fn clear(&self, a: Vec3, b: Vec3, skip_a: Option<usize>, skip_b: Option<usize>) -> bool {
        let seg = Rect::of_segment(a.xy(), b.xy());
        let zmin = a.z.min(b.z);
        self.scenario.buildings.iter().enumerate().all(|(bi, bld)| {
            Some(bi) == skip_a
                || Some(bi) == skip_b
                || zmin > bld.height_m
                || !seg.overlaps(&self.bounds[bi])
                || !geometry::segment_hits_prism(&bld.vertices, bld.height_m, a, b, 0.0, 1.0)
        })
    }

    fn make_path(&self, verts: &[Vec3], faces: Vec<usize>, rf: &crate::scenario::RfConfig) -> Option<PropagationPath> {
        let length: f64 = verts.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        let fspl = fspl_db(length, rf.carrier_frequency_hz).ok()?;
        let bounces = faces.len();
        let aod = (verts[1] - verts[0]).angles_deg();
        let m = verts.len();
        let aoa = (verts[m - 2] - verts[m - 1]).angles_deg();
        Some(PropagationPath {
            kind: if bounces == 0 { PathKind::LoS } else { PathKind::NLoS },
            aod,
            aoa,
            path_loss_db: fspl + bounces as f64 * rf.reflection_loss_db,
            length_m: length,
            bounces,
            vertices: verts.to_vec(),
            faces,
        })
    }
}

/// Orders a window so that `w0` is clockwise of `w1` as seen from `src`.
fn ordered_window(src: Vec2, a: Vec2, b: Vec2) -> (Vec2, Vec2) {
    if geometry::orient(src, a, b) >= 0.0 {
        (a, b)
    } else {
        (b, a)
    }
}

/// Loose test: `p` is beyond the node's wall and inside the cone from the
/// image through the window. Exact validation follows, so this only needs
/// to never reject a valid receiver.
fn in_beam(node: &Node, face: &Face, p: Vec2) -> bool {
    if face.side(p) <= -BEAM_TOL {
        return false;
    }
    let s = node.image;
    let r = (p - s).norm();
    let t0 = BEAM_TOL * (node.w0 - s).norm().max(1.0) * r.max(1.0);
    let t1 = BEAM_TOL * (node.w1 - s).norm().max(1.0) * r.max(1.0);
    geometry::orient(s, node.w0, p) >= -t0 && geometry::orient(s, node.w1, p) <= t1
}

/// Part of wall `f` inside the beam of `parent` (which reflects off `pf`).
fn clip_to_beam(parent: &Node, pf: &Face, f: &Face) -> Option<(Vec2, Vec2)> {
    let d = f.b - f.a;
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    // Each half-plane `g(p) >= -tol` with g affine; g(a + t d) = g0 + t g1.
    let mut keep = |g0: f64, g1: f64, tol: f64| -> bool {
        let g0 = g0 + tol;
        if g1 == 0.0 {
            return g0 >= 0.0;
        }
        let t = -g0 / g1;
        if g1 > 0.0 {
            lo = lo.max(t);
        } else {
            hi = hi.min(t);
        }
        lo <= hi
    };
    let len = d.norm().max(1.0);
    // Beyond the parent wall.
    if !keep(pf.side(f.a), pf.normal.dot(d), BEAM_TOL * len) {
        return None;
    }
    let s = parent.image;
    let scale = |w: Vec2| BEAM_TOL * (w - s).norm().max(1.0) * ((f.a - s).norm() + len);
    // Left of the ray s -> w0.
    let e0 = parent.w0 - s;
    if !keep(e0.cross(f.a - s), e0.cross(d), scale(parent.w0)) {
        return None;
    }
    // Right of the ray s -> w1.
    let e1 = parent.w1 - s;
    if !keep(-e1.cross(f.a - s), -e1.cross(d), scale(parent.w1)) {
        return None;
    }
    if hi - lo <= 0.0 {
        return None;
    }
    Some((f.a + d * lo, f.a + d * hi))
}

/// Intersection of segment `s -> t` with wall `f`, if it lands on the wall
/// segment (closed) strictly between `s` and `t`.
fn segment_line_hit(s: Vec2, t: Vec2, f: &Face) -> Option<Vec2> {
    let ds = f.side(s);
    let dt = f.side(t);
    if !(ds < 0.0 && dt > 0.0) {
        return None;
    }
    let u = ds / (ds - dt);
    let p = s + (t - s) * u;
    let e = f.b - f.a;
    let along = (p - f.a).dot(e) / e.dot(e);
    if !(0.0..=1.0).contains(&along) {
        return None;
    }
    // Snap onto the wall line to keep the specular residual at rounding level.
    Some(f.a + e * along)
}

/// Paths from a gNB to a UE position.
pub fn trace(scenario: &Scenario, gnb: &GnbSite, ue: Vec3) -> Vec<PropagationPath> {
    Tracer::new(scenario, gnb.position).trace_to(ue)
}

/// Paths between two arbitrary points; `trace` with the roles unnamed.
pub fn trace_points(scenario: &Scenario, tx: Vec3, rx: Vec3) -> Vec<PropagationPath> {
    Tracer::new(scenario, tx).trace_to(rx)
}

/// Largest specular-law violation, in radians, over all bounces of `path`:
/// the difference between incidence and reflection angles to the wall
/// normal, or the angle between the outgoing direction and the mirrored
/// incoming direction, whichever is worse.
pub fn specular_residual(path: &PropagationPath, faces: &[Face]) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, &fi) in path.faces.iter().enumerate() {
        let n = faces[fi].normal;
        let n3 = Vec3::new(n.x, n.y, 0.0);
        let p = path.vertices[k + 1];
        let to_prev = path.vertices[k] - p;
        let to_next = path.vertices[k + 2] - p;
        let inc = angle_between(to_prev, n3);
        let refl = angle_between(to_next, n3);
        let d_in = p - path.vertices[k];
        let mirrored = d_in - n3 * (2.0 * d_in.dot(n3));
        worst = worst.max((inc - refl).abs()).max(angle_between(mirrored, to_next));
    }
    worst
}

fn angle_between(a: Vec3, b: Vec3) -> f64 {
    let c = a.dot(b);
    let s = {
        let cx = a.y * b.z - a.z * b.y;
        let cy = a.z * b.x - a.x * b.z;
        let cz = a.x * b.y - a.y * b.x;
        math::sqrt(cx * cx + cy * cy + cz * cz)
    };
    math::atan2(s, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Building;

    fn empty(w: f64) -> Scenario {
        Scenario::open_field(Rect::new(Vec2::new(-w, -w), Vec2::new(w, w)), vec![])
    }

    #[test]
    fn fspl_values() {
        // 20 log10(4 pi f / c) at 28 GHz, evaluated independently.
        assert!((fspl_db(1.0, 28e9).unwrap() - 61.390_944).abs() < 1e-3);
        assert!((fspl_db(100.0, 28e9).unwrap() - 101.390_944).abs() < 1e-3);
        let d = fspl_db(20.0, 28e9).unwrap() - fspl_db(10.0, 28e9).unwrap();
        assert!((d - 20.0 * math::log10(2.0)).abs() < 1e-12);
        assert!(fspl_db(0.0, 28e9).is_err());
        assert!(fspl_db(1.0, -1.0).is_err());
    }

    #[test]
    fn empty_scene_single_los() {
        let s = empty(200.0);
        let g = GnbSite { id: 0, position: Vec3::new(0.0, 0.0, 10.0) };
        let paths = trace(&s, &g, Vec3::new(100.0, 0.0, 1.5));
        assert_eq!(paths.len(), 1);
        let p = &paths[0];
        assert_eq!(p.kind, PathKind::LoS);
        assert_eq!(p.bounces, 0);
        assert!(p.aod.0.abs() < 1e-12);
        assert!((p.aod.1 + libm::atan(8.5 / 100.0).to_degrees()).abs() < 1e-12);
        assert!((p.aod.1 + 4.859).abs() < 1e-3);
        assert!((p.length_m - 100.361).abs() < 1e-3);
        assert!((p.aoa.0 + 180.0).abs() < 1e-12);
        assert!((p.path_loss_db - fspl_db(p.length_m, 28e9).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn single_wall_mirror_path() {
        let mut s = empty(200.0);
        // Long wall along y = 20, facing -y (footprint above it).
        s.buildings.push(Building::rect(Vec2::new(-150.0, 20.0), Vec2::new(150.0, 40.0), 30.0));
        let tx = Vec3::new(0.0, 0.0, 10.0);
        let rx = Vec3::new(60.0, 5.0, 1.5);
        let paths = trace_points(&s, tx, rx);
        assert_eq!(paths.len(), 2, "{paths:?}");
        assert_eq!(paths[0].kind, PathKind::LoS);
        let r = &paths[1];
        assert_eq!(r.bounces, 1);
        // Image source at y = 40 -> unfolded distance.
        let expect = ((60.0f64).powi(2) + (35.0f64).powi(2) + 8.5f64.powi(2)).sqrt();
        assert!((r.length_m - expect).abs() < 1e-9);
        assert!((r.path_loss_db - fspl_db(expect, 28e9).unwrap() - 10.0).abs() < 1e-9);
        assert!(specular_residual(r, &faces(&s)) < 1e-12);
    }

    #[test]
    fn enclosed_receiver_has_no_paths() {
        let mut s = empty(100.0);
        // Four thin walls boxing in the origin.
        s.buildings.push(Building::rect(Vec2::new(-20.0, -20.0), Vec2::new(20.0, -18.0), 30.0));
        s.buildings.push(Building::rect(Vec2::new(-20.0, 18.0), Vec2::new(20.0, 20.0), 30.0));
        s.buildings.push(Building::rect(Vec2::new(-20.0, -18.0), Vec2::new(-18.0, 18.0), 30.0));
        s.buildings.push(Building::rect(Vec2::new(18.0, -18.0), Vec2::new(20.0, 18.0), 30.0));
        let tx = Vec3::new(60.0, 60.0, 10.0);
        assert!(trace_points(&s, tx, Vec3::new(0.0, 0.0, 1.5)).is_empty());
    }

    #[test]
    fn los_checks() {
        let mut s = empty(100.0);
        assert!(line_of_sight(&s, Vec3::new(-50.0, 0.0, 10.0), Vec3::new(50.0, 0.0, 1.5)));
        s.buildings.push(Building::rect(Vec2::new(-5.0, -5.0), Vec2::new(5.0, 5.0), 20.0));
        assert!(!line_of_sight(&s, Vec3::new(-50.0, 0.0, 10.0), Vec3::new(50.0, 0.0, 1.5)));
        assert!(line_of_sight(&s, Vec3::new(-50.0, 0.0, 30.0), Vec3::new(50.0, 0.0, 30.0)));
        // Exactly at roof level grazes.
        assert!(!line_of_sight(&s, Vec3::new(-50.0, 0.0, 20.0), Vec3::new(50.0, 0.0, 20.0)));
    }

    #[test]
    fn reflection_above_roof_is_rejected() {
        let mut s = empty(200.0);
        // Wall lower than both endpoints: rays pass over it, no reflection.
        s.buildings.push(Building::rect(Vec2::new(-150.0, 20.0), Vec2::new(150.0, 40.0), 1.0));
        let paths = trace_points(&s, Vec3::new(0.0, 0.0, 10.0), Vec3::new(60.0, 5.0, 1.5));
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].kind, PathKind::LoS);
    }
}
