//! Brute-force angular ray launching, used as an independent oracle for the
//! image-method tracer.
//!
//! Rays leave the transmitter every 0.1 degrees in the horizontal plane and
//! bounce specularly off walls. Whenever two neighbouring rays share their
//! bounce history and straddle the receiver, the launch angle is refined by
//! bisection until the ray passes through it. Neighbours with different
//! histories are subdivided until the gap is below 1e-10 rad.
//!
//! Only planar scenes are handled: every building must be taller than both
//! end points, so walls always block and always reflect and the 3D path is
//! the 2D path unfolded with a straight height profile.

#![allow(dead_code)]

use std::f64::consts::PI;

pub const STEP_DEG: f64 = 0.1;
const MIN_GAP_RAD: f64 = 1e-10;
const FAR: f64 = 1e9;

#[derive(Debug, Clone, Copy)]
pub struct Wall {
    pub a: [f64; 2],
    pub b: [f64; 2],
    /// Outward unit normal.
    pub n: [f64; 2],
}

/// Walls of counter-clockwise footprints, building by building, edge by edge.
pub fn walls(footprints: &[Vec<[f64; 2]>]) -> Vec<Wall> {
    let mut out = Vec::new();
    for poly in footprints {
        for i in 0..poly.len() {
            let a = poly[i];
            let b = poly[(i + 1) % poly.len()];
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let l = dx.hypot(dy);
            out.push(Wall { a, b, n: [dy / l, -dx / l] });
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct OraclePath {
    /// Wall index of each bounce.
    pub walls: Vec<usize>,
    /// Transmitter, bounce points, receiver (2D).
    pub points: Vec<[f64; 2]>,
    pub length_2d: f64,
    pub launch_rad: f64,
}

impl OraclePath {
    pub fn length_3d(&self, dz: f64) -> f64 {
        self.length_2d.hypot(dz)
    }

    /// `(azimuth, elevation)` of departure in degrees; `dz = z_rx - z_tx`.
    pub fn aod_deg(&self, dz: f64) -> (f64, f64) {
        let p = &self.points;
        (az_deg(p[0], p[1]), dz.atan2(self.length_2d).to_degrees())
    }

    /// `(azimuth, elevation)` of arrival, looking back along the last leg.
    pub fn aoa_deg(&self, dz: f64) -> (f64, f64) {
        let m = self.points.len();
        (az_deg(self.points[m - 1], self.points[m - 2]), (-dz).atan2(self.length_2d).to_degrees())
    }
}

fn az_deg(from: [f64; 2], to: [f64; 2]) -> f64 {
    (to[1] - from[1]).atan2(to[0] - from[0]).to_degrees()
}

/// Smallest absolute difference of two angles in degrees.
pub fn angle_diff_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

#[derive(Debug, Clone, Copy)]
struct Seg {
    start: [f64; 2],
    dir: [f64; 2],
    len: f64,
}

#[derive(Debug, Clone)]
struct Ray {
    segs: Vec<Seg>,
    hits: Vec<usize>,
}

fn cast(walls: &[Wall], tx: [f64; 2], theta: f64, max_bounces: usize) -> Ray {
    let mut start = tx;
    let mut dir = [theta.cos(), theta.sin()];
    let mut segs = Vec::new();
    let mut hits = Vec::new();
    let mut last: Option<usize> = None;
    loop {
        let mut best = FAR;
        let mut best_wall = None;
        for (wi, w) in walls.iter().enumerate() {
            if Some(wi) == last {
                continue;
            }
            if let Some(t) = ray_segment(start, dir, w.a, w.b) {
                if t > 1e-9 && t < best {
                    best = t;
                    best_wall = Some(wi);
                }
            }
        }
        segs.push(Seg { start, dir, len: best });
        let Some(wi) = best_wall else { break };
        if hits.len() == max_bounces {
            break;
        }
        let w = &walls[wi];
        hits.push(wi);
        start = [start[0] + dir[0] * best, start[1] + dir[1] * best];
        let dn = dir[0] * w.n[0] + dir[1] * w.n[1];
        dir = [dir[0] - 2.0 * dn * w.n[0], dir[1] - 2.0 * dn * w.n[1]];
        last = Some(wi);
    }
    Ray { segs, hits }
}

/// Ray parameter of the hit with segment `a b`, if any.
fn ray_segment(o: [f64; 2], d: [f64; 2], a: [f64; 2], b: [f64; 2]) -> Option<f64> {
    let e = [b[0] - a[0], b[1] - a[1]];
    let den = d[0] * e[1] - d[1] * e[0];
    if den == 0.0 {
        return None;
    }
    let w = [a[0] - o[0], a[1] - o[1]];
    let t = (w[0] * e[1] - w[1] * e[0]) / den;
    let s = (w[0] * d[1] - w[1] * d[0]) / den;
    (t > 0.0 && (0.0..=1.0).contains(&s)).then_some(t)
}

/// Per segment: whether the receiver projects inside it, plus the side.
fn probe(ray: &Ray, rx: [f64; 2]) -> Vec<(bool, f64)> {
    ray.segs
        .iter()
        .map(|s| {
            let v = [rx[0] - s.start[0], rx[1] - s.start[1]];
            let along = v[0] * s.dir[0] + v[1] * s.dir[1];
            let side = s.dir[0] * v[1] - s.dir[1] * v[0];
            (along > 0.0 && along < s.len, side)
        })
        .collect()
}

fn same_history(a: &Ray, pa: &[(bool, f64)], b: &Ray, pb: &[(bool, f64)]) -> bool {
    a.hits == b.hits && pa.len() == pb.len() && pa.iter().zip(pb).all(|(x, y)| x.0 == y.0)
}

struct Launcher<'a> {
    walls: &'a [Wall],
    tx: [f64; 2],
    rx: [f64; 2],
    max_bounces: usize,
    found: Vec<OraclePath>,
}

impl Launcher<'_> {
    fn eval(&self, theta: f64) -> (Ray, Vec<(bool, f64)>) {
        let r = cast(self.walls, self.tx, theta, self.max_bounces);
        let p = probe(&r, self.rx);
        (r, p)
    }

    fn scan(&mut self, a: f64, b: f64) {
        let (ra, pa) = self.eval(a);
        let (rb, pb) = self.eval(b);
        if same_history(&ra, &pa, &rb, &pb) {
            for k in 0..pa.len() {
                if pa[k].0 && (pa[k].1 == 0.0 || pa[k].1.signum() != pb[k].1.signum()) {
                    self.refine(a, b, k, &ra);
                }
            }
        } else if b - a > MIN_GAP_RAD {
            let m = 0.5 * (a + b);
            self.scan(a, m);
            self.scan(m, b);
        }
    }

    /// Bisects on the side of segment `k` while the history stays fixed.
    fn refine(&mut self, mut a: f64, mut b: f64, k: usize, ref_ray: &Ray) {
        let (ra, pa) = self.eval(a);
        let sa = pa[k].1;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let (rm, pm) = self.eval(m);
            if !same_history(&ra, &pa, &rm, &pm) {
                // History changes inside the bracket: split and rescan.
                self.scan(a, m);
                self.scan(m, b);
                return;
            }
            if pm[k].1 == 0.0 {
                a = m;
                b = m;
                break;
            }
            if pm[k].1.signum() == sa.signum() {
                a = m;
            } else {
                b = m;
            }
        }
        let theta = 0.5 * (a + b);
        let ray = cast(self.walls, self.tx, theta, self.max_bounces);
        let walls = ref_ray.hits[..k].to_vec();
        if ray.hits.len() < k || ray.hits[..k] != walls[..] {
            return;
        }
        if self.found.iter().any(|p| p.walls == walls) {
            return;
        }
        let mut points = vec![self.tx];
        let mut length = 0.0;
        for s in &ray.segs[..k] {
            length += s.len;
            points.push([s.start[0] + s.dir[0] * s.len, s.start[1] + s.dir[1] * s.len]);
        }
        let last = points[k];
        length += (self.rx[0] - last[0]).hypot(self.rx[1] - last[1]);
        points.push(self.rx);
        self.found.push(OraclePath {
            walls,
            points,
            length_2d: length,
            launch_rad: theta,
        });
    }
}

/// All paths from `tx` to `rx` with at most `max_bounces` reflections,
/// sorted by bounce count and then wall sequence.
pub fn launch(walls: &[Wall], tx: [f64; 2], rx: [f64; 2], max_bounces: usize) -> Vec<OraclePath> {
    let mut l = Launcher {
        walls,
        tx,
        rx,
        max_bounces,
        found: Vec::new(),
    };
    let n = (360.0 / STEP_DEG).round() as usize;
    let step = 2.0 * PI / n as f64;
    for i in 0..n {
        l.scan(i as f64 * step, (i + 1) as f64 * step);
    }
    let mut found = l.found;
    found.sort_by(|a, b| a.walls.len().cmp(&b.walls.len()).then_with(|| a.walls.cmp(&b.walls)));
    found
}
