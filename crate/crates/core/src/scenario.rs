//! The simulated world: study area, buildings, gNB sites, UE grid and RF
//! constants.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{self, Rect, Vec2, Vec3};
use crate::math;
use crate::rng::{self, stream};
use crate::{Error, Result};

/// Outward offset applied when snapping a gNB to a building corner.
pub const CORNER_OFFSET_M: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfConfig {
    pub carrier_frequency_hz: f64,
    pub tx_power_dbm: f64,
    pub rss_threshold_dbm: f64,
    pub max_reflections: usize,
    pub reflection_loss_db: f64,
    pub ue_height_m: f64,
    pub gnb_height_m: f64,
}

impl Default for RfConfig {
    fn default() -> Self {
        Self {
            carrier_frequency_hz: 28e9,
            tx_power_dbm: 20.0,
            rss_threshold_dbm: -174.0,
            max_reflections: 4,
            reflection_loss_db: 10.0,
            ue_height_m: 1.5,
            gnb_height_m: 10.0,
        }
    }
}

impl RfConfig {
    /// Coverage threshold of the `practical` profile. Everything
    /// else matches the defaults.
    pub const PRACTICAL_THRESHOLD_DBM: f64 = -90.0;

    pub fn practical() -> Self {
        Self {
            rss_threshold_dbm: Self::PRACTICAL_THRESHOLD_DBM,
            ..Self::default()
        }
    }

    fn violations(&self, out: &mut Vec<String>) {
        if !(self.carrier_frequency_hz > 0.0 && self.carrier_frequency_hz.is_finite()) {
            out.push(format!("rf.carrier_frequency_hz must be > 0 (got {})", self.carrier_frequency_hz));
        }
        if !self.tx_power_dbm.is_finite() {
            out.push(String::from("rf.tx_power_dbm must be finite"));
        }
        if self.rss_threshold_dbm.is_nan() {
            out.push(String::from("rf.rss_threshold_dbm must not be NaN"));
        }
        if !(self.reflection_loss_db >= 0.0 && self.reflection_loss_db.is_finite()) {
            out.push(format!("rf.reflection_loss_db must be >= 0 (got {})", self.reflection_loss_db));
        }
        if !(self.ue_height_m > 0.0 && self.ue_height_m.is_finite()) {
            out.push(format!("rf.ue_height_m must be > 0 (got {})", self.ue_height_m));
        }
        if !(self.gnb_height_m > 0.0 && self.gnb_height_m.is_finite()) {
            out.push(format!("rf.gnb_height_m must be > 0 (got {})", self.gnb_height_m));
        }
    }
}

/// An extruded convex footprint. Vertices are counter-clockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Building {
    pub vertices: Vec<Vec2>,
    pub height_m: f64,
}

impl Building {
    /// Axis-aligned rectangular building.
    pub fn rect(min: Vec2, max: Vec2, height_m: f64) -> Self {
        Self {
            vertices: vec![min, Vec2::new(max.x, min.y), max, Vec2::new(min.x, max.y)],
            height_m,
        }
    }

    pub fn bounds(&self) -> Rect {
        Rect::bounding(self.vertices.iter().copied()).unwrap_or(Rect::new(Vec2::default(), Vec2::default()))
    }

    pub fn contains_strict(&self, p: Vec2) -> bool {
        geometry::point_strictly_inside_convex(&self.vertices, p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnbSite {
    pub id: usize,
    pub position: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub area: Rect,
    pub rf: RfConfig,
    pub buildings: Vec<Building>,
    pub gnbs: Vec<GnbSite>,
    pub grid_resolution_m: f64,
    pub seed: u64,
}

impl Scenario {
    /// An empty study area with default RF settings.
    pub fn open_field(area: Rect, gnbs: Vec<GnbSite>) -> Self {
        Self {
            area,
            rf: RfConfig::default(),
            buildings: Vec::new(),
            gnbs,
            grid_resolution_m: 1.0,
            seed: 0,
        }
    }

    /// Every violated invariant, in a stable order. Empty means valid.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.rf.violations(&mut out);
        if !(self.grid_resolution_m > 0.0 && self.grid_resolution_m.is_finite()) {
            out.push(format!("grid_resolution_m must be > 0 (got {})", self.grid_resolution_m));
        }
        if !(self.area.width() > 0.0 && self.area.height() > 0.0) || !self.area.min.is_finite() || !self.area.max.is_finite() {
            out.push(String::from("area must have positive finite extent (min < max)"));
        }
        for (k, b) in self.buildings.iter().enumerate() {
            if b.vertices.len() < 3 {
                out.push(format!("building {k}: footprint needs >= 3 vertices (got {})", b.vertices.len()));
            } else if !geometry::is_strictly_convex_ccw(&b.vertices) {
                out.push(format!(
                    "building {k}: footprint must be a convex counter-clockwise polygon without collinear or self-intersecting edges"
                ));
            }
            if !(b.height_m > 0.0 && b.height_m.is_finite()) {
                out.push(format!("building {k}: height_m must be > 0 (got {})", b.height_m));
            }
            if b.vertices.iter().any(|v| !self.area.contains(*v)) {
                out.push(format!("building {k}: footprint must lie within the area"));
            }
        }
        for (k, g) in self.gnbs.iter().enumerate() {
            if g.id != k {
                out.push(format!("gnb {k}: ids must be 0..num_gnbs in order (got id {})", g.id));
            }
            if !g.position.is_finite() || !self.area.contains(g.position.xy()) {
                out.push(format!("gnb {}: position must lie within the area", g.id));
            }
            if (g.position.z - self.rf.gnb_height_m).abs() > 1e-9 {
                out.push(format!(
                    "gnb {}: z must equal rf.gnb_height_m ({} != {})",
                    g.id, g.position.z, self.rf.gnb_height_m
                ));
            }
            if let Some(bk) = self.buildings.iter().position(|b| b.vertices.len() >= 3 && b.contains_strict(g.position.xy())) {
                out.push(format!("gnb {}: position lies inside building {bk}", g.id));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Invariant(v.join("; ")))
        }
    }

    pub fn gnb(&self, id: usize) -> Option<&GnbSite> {
        self.gnbs.get(id)
    }

    /// True when `p` lies strictly inside some building footprint.
    pub fn inside_building(&self, p: Vec2) -> bool {
        self.buildings.iter().any(|b| b.bounds().contains(p) && b.contains_strict(p))
    }

    /// Lattice size `(nx, ny)` of the UE grid before building exclusion.
    /// Both area boundaries are included.
    pub fn lattice_dims(&self) -> (usize, usize) {
        let r = self.grid_resolution_m;
        if !(r > 0.0) || !(self.area.width() >= 0.0) || !(self.area.height() >= 0.0) {
            return (0, 0);
        }
        let nx = math::floor(self.area.width() / r + 1e-9) as usize + 1;
        let ny = math::floor(self.area.height() / r + 1e-9) as usize + 1;
        (nx, ny)
    }

    /// UE measurement points: the inclusive lattice at `grid_resolution_m`,
    /// row-major (y outer, x inner), at UE height, minus points strictly
    /// inside a building.
    pub fn ue_grid(&self) -> Vec<Vec3> {
        let (nx, ny) = self.lattice_dims();
        let r = self.grid_resolution_m;
        let z = self.rf.ue_height_m;
        let bounds: Vec<Rect> = self.buildings.iter().map(Building::bounds).collect();
        let mut out = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            let y = self.area.min.y + iy as f64 * r;
            for ix in 0..nx {
                let x = self.area.min.x + ix as f64 * r;
                let p = Vec2::new(x, y);
                let blocked = self
                    .buildings
                    .iter()
                    .zip(&bounds)
                    .any(|(b, bb)| bb.contains(p) && b.contains_strict(p));
                if !blocked {
                    out.push(p.extend(z));
                }
            }
        }
        out
    }

    /// Stable 64-bit FNV-1a digest of every field. Used to tie datasets to
    /// the scenario they were built from.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv::new();
        h.f64(self.area.min.x);
        h.f64(self.area.min.y);
        h.f64(self.area.max.x);
        h.f64(self.area.max.y);
        let rf = &self.rf;
        for v in [
            rf.carrier_frequency_hz,
            rf.tx_power_dbm,
            rf.rss_threshold_dbm,
            rf.reflection_loss_db,
            rf.ue_height_m,
            rf.gnb_height_m,
        ] {
            h.f64(v);
        }
        h.u64(rf.max_reflections as u64);
        h.u64(self.buildings.len() as u64);
        for b in &self.buildings {
            h.u64(b.vertices.len() as u64);
            for v in &b.vertices {
                h.f64(v.x);
                h.f64(v.y);
            }
            h.f64(b.height_m);
        }
        h.u64(self.gnbs.len() as u64);
        for g in &self.gnbs {
            h.u64(g.id as u64);
            h.f64(g.position.x);
            h.f64(g.position.y);
            h.f64(g.position.z);
        }
        h.f64(self.grid_resolution_m);
        h.u64(self.seed);
        h.finish()
    }
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }
    fn u64(&mut self, v: u64) {
        for b in v.to_le_bytes() {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }
    fn f64(&mut self, v: f64) {
        self.u64(v.to_bits());
    }
    fn finish(&self) -> u64 {
        self.0
    }
}

/// Knobs of the synthetic city generator. Dense, small-gap settings emulate
/// a building-dense centre; few buildings emulate an open district.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CityParams {
    pub area: Rect,
    pub building_count: usize,
    /// Side length range of the rectangular footprints, meters.
    pub building_size_range: (f64, f64),
    pub building_height_range: (f64, f64),
    /// Minimum street width between buildings.
    pub min_building_gap_m: f64,
    pub gnb_count: usize,
    pub min_gnb_spacing_m: f64,
    pub grid_resolution_m: f64,
    pub rf: RfConfig,
    pub seed: u64,
}

impl Default for CityParams {
    fn default() -> Self {
        Self {
            area: Rect::new(Vec2::new(0.0, 0.0), Vec2::new(500.0, 500.0)),
            building_count: 40,
            building_size_range: (20.0, 60.0),
            building_height_range: (15.0, 45.0),
            min_building_gap_m: 8.0,
            gnb_count: 27,
            min_gnb_spacing_m: 40.0,
            grid_resolution_m: 1.0,
            rf: RfConfig::default(),
            seed: 1,
        }
    }
}

const PLACEMENT_TRIES_PER_ITEM: usize = 2000;

/// Builds a random city: axis-aligned rectangular buildings placed by
/// rejection sampling, gNBs snapped to random building corners.
pub fn generate_synthetic_city(p: &CityParams) -> Result<Scenario> {
    let (smin, smax) = p.building_size_range;
    let (hmin, hmax) = p.building_height_range;
    if p.gnb_count < 1 {
        return Err(Error::param("gnb_count", "must be >= 1"));
    }
    if !(smin > 0.0 && smax >= smin && smax.is_finite()) {
        return Err(Error::param("building_size_range", format!("need 0 < min <= max, got ({smin}, {smax})")));
    }
    if !(hmin > 0.0 && hmax >= hmin && hmax.is_finite()) {
        return Err(Error::param("building_height_range", format!("need 0 < min <= max, got ({hmin}, {hmax})")));
    }
    if !(p.min_gnb_spacing_m >= 0.0) || !(p.min_building_gap_m >= 0.0) {
        return Err(Error::param("spacing", "min_gnb_spacing_m and min_building_gap_m must be >= 0"));
    }
    if !(p.grid_resolution_m > 0.0) {
        return Err(Error::param("grid_resolution_m", "must be > 0"));
    }
    if !(p.area.width() > 0.0 && p.area.height() > 0.0) {
        return Err(Error::param("area", "must have positive extent"));
    }
    if p.building_count > 0 && (p.area.width() < smin || p.area.height() < smin) {
        return Err(Error::param("building_size_range", "buildings do not fit into the area"));
    }

    let mut rng = rng::rng_from_seed(rng::derive_seed(p.seed, stream::SCENARIO, 0));
    let mut rects: Vec<Rect> = Vec::with_capacity(p.building_count);
    let mut buildings = Vec::with_capacity(p.building_count);
    let gap = p.min_building_gap_m;
    for k in 0..p.building_count {
        let mut placed = false;
        for _ in 0..PLACEMENT_TRIES_PER_ITEM {
            let w = rng.random_range(smin..=smax).min(p.area.width());
            let d = rng.random_range(smin..=smax).min(p.area.height());
            let x = p.area.min.x + rng.random_range(0.0..=(p.area.width() - w));
            let y = p.area.min.y + rng.random_range(0.0..=(p.area.height() - d));
            let r = Rect::new(Vec2::new(x, y), Vec2::new(x + w, y + d));
            let grown = Rect::new(r.min - Vec2::new(gap, gap), r.max + Vec2::new(gap, gap));
            if rects.iter().any(|o| grown.overlaps(o)) {
                continue;
            }
            let h = rng.random_range(hmin..=hmax);
            rects.push(r);
            buildings.push(Building::rect(r.min, r.max, h));
            placed = true;
            break;
        }
        if !placed {
            return Err(Error::Placement(format!(
                "could not place building {k} of {} without overlap; reduce building_count or sizes",
                p.building_count
            )));
        }
    }

    let z = p.rf.gnb_height_m;
    let mut gnbs: Vec<GnbSite> = Vec::with_capacity(p.gnb_count);
    if buildings.is_empty() {
        let a = p.area;
        let corners = [a.min, Vec2::new(a.max.x, a.min.y), a.max, Vec2::new(a.min.x, a.max.y)];
        for c in corners {
            if gnbs.len() == p.gnb_count {
                break;
            }
            if gnbs.iter().all(|g| (g.position.xy() - c).norm() >= p.min_gnb_spacing_m) {
                gnbs.push(GnbSite { id: gnbs.len(), position: c.extend(z) });
            }
        }
        if gnbs.len() < p.gnb_count {
            return Err(Error::Placement(format!(
                "an empty area offers 4 corner sites; cannot place {} gNBs",
                p.gnb_count
            )));
        }
    } else {
        let off = CORNER_OFFSET_M / core::f64::consts::SQRT_2;
        for k in 0..p.gnb_count {
            let mut placed = false;
            for _ in 0..PLACEMENT_TRIES_PER_ITEM {
                let r = rects[rng.random_range(0..rects.len())];
                let (c, dir) = match rng.random_range(0..4u8) {
                    0 => (r.min, Vec2::new(-1.0, -1.0)),
                    1 => (Vec2::new(r.max.x, r.min.y), Vec2::new(1.0, -1.0)),
                    2 => (r.max, Vec2::new(1.0, 1.0)),
                    _ => (Vec2::new(r.min.x, r.max.y), Vec2::new(-1.0, 1.0)),
                };
                let pos = c + dir * off;
                if !p.area.contains(pos) {
                    continue;
                }
                if buildings.iter().any(|b| b.contains_strict(pos)) {
                    continue;
                }
                if gnbs.iter().any(|g| (g.position.xy() - pos).norm() < p.min_gnb_spacing_m) {
                    continue;
                }
                gnbs.push(GnbSite { id: k, position: pos.extend(z) });
                placed = true;
                break;
            }
            if !placed {
                return Err(Error::Placement(format!(
                    "could not place gNB {k} of {} with spacing {} m; reduce gnb_count or min_gnb_spacing_m",
                    p.gnb_count, p.min_gnb_spacing_m
                )));
            }
        }
    }

    let s = Scenario {
        area: p.area,
        rf: p.rf.clone(),
        buildings,
        gnbs,
        grid_resolution_m: p.grid_resolution_m,
        seed: p.seed,
    };
    s.validate()?;
    Ok(s)
}
