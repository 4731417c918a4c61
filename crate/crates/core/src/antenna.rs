//! Codebook steering and uniform planar array gains.
//!
//! Elements are isotropic and the array factor is evaluated in closed form:
//! for an `M x N` array with spacing `d` wavelengths the normalized power
//! pattern separates into two Dirichlet kernels,
//!
//! `G = |sin(M psi_c / 2) / sin(psi_c / 2)|^2 |sin(N psi_r / 2) / sin(psi_r / 2)|^2 / (M N)`,
//!
//! with `psi = 2 pi d (u - u_steer)` along each array axis. At the steering
//! direction `G = M N`. Gains below [`GAIN_FLOOR_DBI`] are clamped.
//!
//! The gNB panel stands vertically and faces +x, so its axes see
//! `cos(el) sin(az)` and `sin(el)`. The UE panel lies flat and faces up, so
//! its axes see `cos(el) cos(az)` and `cos(el) sin(az)`: every azimuth is
//! distinguishable, and each upper-elevation UE beam has an exact twin in
//! the lower half.

use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::math;
use crate::{Error, Result};

pub const GAIN_FLOOR_DBI: f64 = -40.0;
pub const GNB_CODEBOOK_SIZE: usize = 64;
pub const UE_CODEBOOK_SIZE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Gnb,
    Ue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    /// Panel in the y-z plane, boresight +x.
    Vertical,
    /// Panel in the x-y plane, boresight +z.
    Horizontal,
}

impl Orientation {
    /// Direction cosines along the column and row axes of the panel.
    #[inline]
    fn cosines(self, az_deg: f64, el_deg: f64) -> (f64, f64) {
        let az = az_deg.to_radians();
        let el = el_deg.to_radians();
        let ce = math::cos(el);
        match self {
            Orientation::Vertical => (ce * math::sin(az), math::sin(el)),
            Orientation::Horizontal => (ce * math::cos(az), ce * math::sin(az)),
        }
    }
}

/// Angular layout of a codebook: `n_az x n_el` cells tiling the sectors,
/// each entry at its cell centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodebookLayout {
    pub az_range_deg: (f64, f64),
    pub el_range_deg: (f64, f64),
    pub n_az: usize,
    pub n_el: usize,
}

impl CodebookLayout {
    /// 16 x 4 over azimuth [-60, 60] and elevation [-30, 0] for the gNB;
    /// 8 x 2 over azimuth [-180, 180) and elevation [-30, 30] for the UE.
    /// Other sizes keep the elevation count when it divides, else use one row.
    pub fn default_for(side: Side, num_entries: usize) -> Self {
        let (az, el, n_el) = match side {
            Side::Gnb => ((-60.0, 60.0), (-30.0, 0.0), 4),
            Side::Ue => ((-180.0, 180.0), (-30.0, 30.0), 2),
        };
        let n_el = if num_entries % n_el == 0 { n_el } else { 1 };
        Self {
            az_range_deg: az,
            el_range_deg: el,
            n_az: num_entries / n_el,
            n_el,
        }
    }

    pub fn len(&self) -> usize {
        self.n_az * self.n_el
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entries in elevation-major, azimuth-minor order.
    pub fn entries(&self) -> Vec<(f64, f64)> {
        let az_step = (self.az_range_deg.1 - self.az_range_deg.0) / self.n_az as f64;
        let el_step = (self.el_range_deg.1 - self.el_range_deg.0) / self.n_el as f64;
        let mut out = Vec::with_capacity(self.len());
        for e in 0..self.n_el {
            let el = self.el_range_deg.0 + (e as f64 + 0.5) * el_step;
            for a in 0..self.n_az {
                let az = self.az_range_deg.0 + (a as f64 + 0.5) * az_step;
                out.push((az, el));
            }
        }
        out
    }
}

/// A uniform planar array steered by phase shifts only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarArray {
    /// `(rows, cols)`; rows run along the second panel axis.
    pub dims: (usize, usize),
    pub spacing_wavelengths: f64,
    pub orientation: Orientation,
}

impl PlanarArray {
    pub fn elements(&self) -> usize {
        self.dims.0 * self.dims.1
    }

    /// Linear power gain towards `(az, el)` when steered to `steer`.
    pub fn gain_linear(&self, steer: (f64, f64), az_deg: f64, el_deg: f64) -> f64 {
        let s = self.orientation.cosines(steer.0, steer.1);
        self.gain_from_cosines(s, az_deg, el_deg)
    }

    #[inline]
    fn gain_from_cosines(&self, steer: (f64, f64), az_deg: f64, el_deg: f64) -> f64 {
        let (uc, ur) = self.orientation.cosines(az_deg, el_deg);
        let k = 2.0 * PI * self.spacing_wavelengths;
        let fc = dirichlet(self.dims.1, k * (uc - steer.0));
        let fr = dirichlet(self.dims.0, k * (ur - steer.1));
        fc * fr / self.elements() as f64
    }

    pub fn gain_dbi(&self, steer: (f64, f64), az_deg: f64, el_deg: f64) -> f64 {
        floor_dbi(self.gain_linear(steer, az_deg, el_deg))
    }
}

/// `|sum_{m<M} exp(j m psi)|^2`.
#[inline]
fn dirichlet(m: usize, psi: f64) -> f64 {
    let half = 0.5 * psi;
    let den = math::sin(half);
    if den.abs() < 1e-12 {
        // Grating direction (or the main lobe): every element adds in phase.
        let num = math::sin(m as f64 * half);
        if num.abs() < 1e-12 * m as f64 {
            return (m * m) as f64;
        }
    }
    let num = math::sin(m as f64 * half);
    let r = num / den;
    r * r
}

#[inline]
fn floor_dbi(lin: f64) -> f64 {
    let db = math::linear_to_db(lin);
    if db.is_nan() || db < GAIN_FLOOR_DBI {
        GAIN_FLOOR_DBI
    } else {
        db
    }
}

/// Linear-domain floor matching [`GAIN_FLOOR_DBI`].
pub const GAIN_FLOOR_LINEAR: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub side: Side,
    pub array: PlanarArray,
    pub layout: CodebookLayout,
    /// `(azimuth_deg, elevation_deg)` steering direction of each beam id.
    pub entries: Vec<(f64, f64)>,
    steer_cosines: Vec<(f64, f64)>,
}

impl Codebook {
    pub fn gnb_default() -> Self {
        build_codebook(Side::Gnb, (8, 8), GNB_CODEBOOK_SIZE, 0.5).expect("static gNB codebook")
    }

    pub fn ue_default() -> Self {
        build_codebook(Side::Ue, (4, 4), UE_CODEBOOK_SIZE, 0.5).expect("static UE codebook")
    }

    pub fn with_layout(side: Side, array: PlanarArray, layout: CodebookLayout) -> Result<Self> {
        if layout.is_empty() {
            return Err(Error::param("num_entries", "must be >= 1"));
        }
        if array.dims.0 == 0 || array.dims.1 == 0 {
            return Err(Error::param("array_dims", "must be positive"));
        }
        if !(array.spacing_wavelengths > 0.0 && array.spacing_wavelengths.is_finite()) {
            return Err(Error::param("spacing", "must be > 0"));
        }
        let entries = layout.entries();
        let steer_cosines = entries.iter().map(|&(a, e)| array.orientation.cosines(a, e)).collect();
        Ok(Self {
            side,
            array,
            layout,
            entries,
            steer_cosines,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    #[inline]
    fn steer(&self, beam: usize) -> (f64, f64) {
        self.steer_cosines[beam]
    }

    pub fn gain_dbi(&self, beam_id: usize, azimuth_deg: f64, elevation_deg: f64) -> Result<f64> {
        if beam_id >= self.len() {
            return Err(Error::BeamOutOfRange { id: beam_id, len: self.len() });
        }
        Ok(floor_dbi(self.array.gain_from_cosines(self.steer(beam_id), azimuth_deg, elevation_deg)))
    }

    /// Floored linear gains of every beam towards one direction.
    pub fn gains_linear(&self, azimuth_deg: f64, elevation_deg: f64, out: &mut Vec<f64>) {
        out.clear();
        for b in 0..self.len() {
            let g = self.array.gain_from_cosines(self.steer(b), azimuth_deg, elevation_deg);
            out.push(if g.is_nan() || g < GAIN_FLOOR_LINEAR { GAIN_FLOOR_LINEAR } else { g });
        }
    }
}

/// Builds a codebook with the default angular layout for `side`.
pub fn build_codebook(side: Side, array_dims: (usize, usize), num_entries: usize, spacing: f64) -> Result<Codebook> {
    if num_entries == 0 {
        return Err(Error::param("num_entries", "must be >= 1"));
    }
    let orientation = match side {
        Side::Gnb => Orientation::Vertical,
        Side::Ue => Orientation::Horizontal,
    };
    let array = PlanarArray {
        dims: array_dims,
        spacing_wavelengths: spacing,
        orientation,
    };
    Codebook::with_layout(side, array, CodebookLayout::default_for(side, num_entries))
}

/// Width of the region around `steer` where the gain stays within 3 dB of
/// the peak, scanning azimuth at the steering elevation in `step_deg` steps.
pub fn half_power_beamwidth_az(array: &PlanarArray, steer: (f64, f64), step_deg: f64) -> f64 {
    let peak = array.gain_linear(steer, steer.0, steer.1);
    let half = 0.5 * peak;
    let mut right = 0.0;
    while array.gain_linear(steer, steer.0 + right + step_deg, steer.1) >= half && right < 180.0 {
        right += step_deg;
    }
    let mut left = 0.0;
    while array.gain_linear(steer, steer.0 - left - step_deg, steer.1) >= half && left < 180.0 {
        left += step_deg;
    }
    left + right
}
