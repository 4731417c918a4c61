//! Planar and 3D primitives used by the scenario and the tracer.
//!
//! Buildings are extruded convex polygons, so the only solids are convex
//! prisms and every query reduces to half-space clipping.

use core::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Self) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        math::hypot(self.x, self.y)
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        Self::new(self.x / n, self.y / n)
    }

    /// Rotated by -90 degrees. For a counter-clockwise polygon edge this is
    /// the outward normal direction.
    #[inline]
    pub fn perp_cw(self) -> Self {
        Self::new(self.y, -self.x)
    }

    pub fn extend(self, z: f64) -> Vec3 {
        Vec3::new(self.x, self.y, z)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Self;
    #[inline]
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn xy(self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    #[inline]
    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn norm(self) -> f64 {
        math::sqrt(self.dot(self))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// `(azimuth_deg, elevation_deg)` of this direction. Azimuth is measured
    /// counter-clockwise from +x and wrapped into `[-180, 180)`.
    pub fn angles_deg(self) -> (f64, f64) {
        let horiz = math::hypot(self.x, self.y);
        let az = math::wrap_deg(math::atan2(self.y, self.x).to_degrees());
        let el = math::atan2(self.z, horiz).to_degrees();
        (az, el)
    }
}

impl Add for Vec3 {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Self;
    #[inline]
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Orientation of `c` relative to the directed line `a -> b`; positive when
/// `c` is to the left.
#[inline]
pub fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

/// Signed area of a polygon; positive for counter-clockwise winding.
pub fn signed_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += poly[i].cross(poly[(i + 1) % n]);
    }
    0.5 * acc
}

/// True when `poly` is a strictly convex counter-clockwise polygon with at
/// least three vertices and no repeated or collinear consecutive vertices.
pub fn is_strictly_convex_ccw(poly: &[Vec2]) -> bool {
    let n = poly.len();
    if n < 3 || poly.iter().any(|p| !p.is_finite()) {
        return false;
    }
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let c = poly[(i + 2) % n];
        if orient(a, b, c) <= 0.0 {
            return false;
        }
    }
    // Turning number one: a star polygon also turns left at every vertex.
    let mut turn = 0.0;
    for i in 0..n {
        let d0 = poly[(i + 1) % n] - poly[i];
        let d1 = poly[(i + 2) % n] - poly[(i + 1) % n];
        turn += math::atan2(d0.cross(d1), d0.dot(d1));
    }
    (turn - core::f64::consts::TAU).abs() < 1e-6
}

/// Strict interior test for a convex counter-clockwise polygon. Points on
/// the boundary are outside.
pub fn point_strictly_inside_convex(poly: &[Vec2], p: Vec2) -> bool {
    let n = poly.len();
    (0..n).all(|i| orient(poly[i], poly[(i + 1) % n], p) > 0.0)
}

/// Closed containment test (boundary counts as inside).
pub fn point_in_convex_closed(poly: &[Vec2], p: Vec2) -> bool {
    let n = poly.len();
    (0..n).all(|i| orient(poly[i], poly[(i + 1) % n], p) >= 0.0)
}

/// Clips the parametric segment `a + t (b - a)`, `t` in `[t0, t1]`, against a
/// closed convex prism given by its counter-clockwise footprint and height.
/// Returns `true` when any part of the segment touches the closed solid.
pub fn segment_hits_prism(footprint: &[Vec2], height: f64, a: Vec3, b: Vec3, t0: f64, t1: f64) -> bool {
    let d = b - a;
    let mut lo = t0;
    let mut hi = t1;
    // Each constraint is `num + t * den <= 0`.
    let mut clip = |num: f64, den: f64| -> bool {
        if den == 0.0 {
            return num <= 0.0;
        }
        let t = -num / den;
        if den > 0.0 {
            if t < hi {
                hi = t;
            }
        } else if t > lo {
            lo = t;
        }
        lo <= hi
    };
    // Roof and ground.
    if !clip(a.z - height, d.z) || !clip(-a.z, -d.z) {
        return false;
    }
    let n = footprint.len();
    for i in 0..n {
        let p = footprint[i];
        let q = footprint[(i + 1) % n];
        let normal = (q - p).perp_cw();
        let num = normal.dot(a.xy() - p);
        let den = normal.dot(d.xy());
        if !clip(num, den) {
            return false;
        }
    }
    lo <= hi
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub const fn new(min: Vec2, max: Vec2) -> Self {
        Self { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn overlaps(&self, o: &Rect) -> bool {
        self.min.x <= o.max.x && o.min.x <= self.max.x && self.min.y <= o.max.y && o.min.y <= self.max.y
    }

    pub fn bounding(points: impl IntoIterator<Item = Vec2>) -> Option<Rect> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut r = Rect::new(first, first);
        for p in it {
            r.min.x = r.min.x.min(p.x);
            r.min.y = r.min.y.min(p.y);
            r.max.x = r.max.x.max(p.x);
            r.max.y = r.max.y.max(p.y);
        }
        Some(r)
    }

    /// Bounding box of a segment.
    pub fn of_segment(a: Vec2, b: Vec2) -> Rect {
        Rect::new(Vec2::new(a.x.min(b.x), a.y.min(b.y)), Vec2::new(a.x.max(b.x), a.y.max(b.y)))
    }
}
