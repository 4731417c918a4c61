//! Beam-pair-link RSS matrices.
//!
//! Every path contributes its power through the gain of gNB beam `i` at the
//! departure angle and UE beam `j` at the arrival angle; contributions add
//! in linear power, without phase.

use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::antenna::{Codebook, GNB_CODEBOOK_SIZE, UE_CODEBOOK_SIZE};
use crate::geometry::Vec3;
use crate::math;
use crate::raytracer::PropagationPath;
use crate::{Error, Result};

/// Entry value when a location receives no path at all.
pub const NO_PATH: f64 = f64::NEG_INFINITY;

/// Number of beam-pair classes, `64 * 16`.
pub const NUM_CLASSES: usize = GNB_CODEBOOK_SIZE * UE_CODEBOOK_SIZE;

#[derive(Debug, Clone, PartialEq)]
pub struct BplMatrix {
    pub gnb_id: usize,
    pub ue_position: Vec3,
    /// Row-major `[gnb_beam][ue_beam]`, dBm.
    pub values: Vec<f64>,
}

impl BplMatrix {
    pub fn get(&self, gnb_beam: usize, ue_beam: usize) -> f64 {
        self.values[gnb_beam * UE_CODEBOOK_SIZE + ue_beam]
    }

    pub fn is_no_path(&self) -> bool {
        self.values.iter().all(|v| !v.is_finite())
    }

    pub fn max_finite(&self) -> Option<f64> {
        self.values.iter().copied().filter(|v| v.is_finite()).fold(None, |m, v| match m {
            Some(m) if m >= v => Some(m),
            _ => Some(v),
        })
    }
}

/// A beam pair as a flat class id, `gnb_beam * 16 + ue_beam`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BplLabel {
    pub class_id: usize,
    pub rss_dbm: f64,
}

impl BplLabel {
    pub fn encode(gnb_beam: usize, ue_beam: usize) -> usize {
        gnb_beam * UE_CODEBOOK_SIZE + ue_beam
    }

    pub fn decode(class_id: usize) -> (usize, usize) {
        (class_id / UE_CODEBOOK_SIZE, class_id % UE_CODEBOOK_SIZE)
    }

    pub fn gnb_beam(&self) -> usize {
        self.class_id / UE_CODEBOOK_SIZE
    }

    pub fn ue_beam(&self) -> usize {
        self.class_id % UE_CODEBOOK_SIZE
    }
}

/// Reusable buffers for [`compute_bpl_matrix_into`].
#[derive(Default)]
pub struct RssScratch {
    gnb_gains: Vec<f64>,
    ue_gains: Vec<f64>,
    mw: Vec<f64>,
}

pub fn compute_bpl_matrix(
    gnb_id: usize,
    ue_position: Vec3,
    paths: &[PropagationPath],
    gnb_cb: &Codebook,
    ue_cb: &Codebook,
    tx_power_dbm: f64,
) -> Result<BplMatrix> {
    let mut m = BplMatrix {
        gnb_id,
        ue_position,
        values: Vec::new(),
    };
    compute_bpl_matrix_into(&mut m, paths, gnb_cb, ue_cb, tx_power_dbm, &mut RssScratch::default())?;
    Ok(m)
}

/// Fills `out.values` in place.
pub fn compute_bpl_matrix_into(
    out: &mut BplMatrix,
    paths: &[PropagationPath],
    gnb_cb: &Codebook,
    ue_cb: &Codebook,
    tx_power_dbm: f64,
    scratch: &mut RssScratch,
) -> Result<()> {
    if gnb_cb.len() != GNB_CODEBOOK_SIZE {
        return Err(Error::CodebookSize {
            expected: GNB_CODEBOOK_SIZE,
            got: gnb_cb.len(),
        });
    }
    if ue_cb.len() != UE_CODEBOOK_SIZE {
        return Err(Error::CodebookSize {
            expected: UE_CODEBOOK_SIZE,
            got: ue_cb.len(),
        });
    }
    out.values.clear();
    if paths.is_empty() {
        out.values.resize(NUM_CLASSES, NO_PATH);
        return Ok(());
    }
    let mw = &mut scratch.mw;
    mw.clear();
    mw.resize(NUM_CLASSES, 0.0);
    for p in paths {
        let power = math::db_to_linear(tx_power_dbm - p.path_loss_db);
        gnb_cb.gains_linear(p.aod.0, p.aod.1, &mut scratch.gnb_gains);
        ue_cb.gains_linear(p.aoa.0, p.aoa.1, &mut scratch.ue_gains);
        for (i, &gi) in scratch.gnb_gains.iter().enumerate() {
            let row = &mut mw[i * UE_CODEBOOK_SIZE..(i + 1) * UE_CODEBOOK_SIZE];
            let a = power * gi;
            for (cell, &uj) in row.iter_mut().zip(&scratch.ue_gains) {
                *cell += a * uj;
            }
        }
    }
    out.values.extend(mw.iter().map(|&v| math::linear_to_db(v)));
    Ok(())
}

/// Descending RSS, ties by ascending class id.
#[inline]
fn rank(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0))
}

/// The `k` strongest finite entries, strongest first.
pub fn top_k(matrix: &BplMatrix, k: usize) -> Vec<BplLabel> {
    let mut cand: Vec<(usize, f64)> = matrix
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .map(|(i, &v)| (i, v))
        .collect();
    if k == 0 {
        return Vec::new();
    }
    if k < cand.len() {
        cand.select_nth_unstable_by(k - 1, rank);
        cand.truncate(k);
    }
    cand.sort_unstable_by(rank);
    cand.into_iter().map(|(c, r)| BplLabel { class_id: c, rss_dbm: r }).collect()
}

/// A location is covered when its best entry exceeds the threshold.
pub fn is_covered(matrix: &BplMatrix, threshold_dbm: f64) -> bool {
    matches!(matrix.max_finite(), Some(m) if m > threshold_dbm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raytracer::PathKind;
    use alloc::vec;

    fn path(pl: f64, aod: (f64, f64), aoa: (f64, f64)) -> PropagationPath {
        PropagationPath {
            kind: PathKind::LoS,
            aod,
            aoa,
            path_loss_db: pl,
            length_m: 100.0,
            bounces: 0,
            vertices: vec![],
            faces: vec![],
        }
    }

    fn matrix(values: Vec<f64>) -> BplMatrix {
        BplMatrix {
            gnb_id: 0,
            ue_position: Vec3::default(),
            values,
        }
    }

    #[test]
    fn single_path_db_identity() {
        let g = Codebook::gnb_default();
        let u = Codebook::ue_default();
        let (i, j) = (21, 5);
        let p = path(100.0, g.entries[i], u.entries[j]);
        let m = compute_bpl_matrix(0, Vec3::default(), core::slice::from_ref(&p), &g, &u, 20.0).unwrap();
        let expect = 20.0 - 100.0 + 10.0 * math::log10(64.0) + 10.0 * math::log10(16.0);
        assert!((m.get(i, j) - expect).abs() < 1e-9);
        assert!((m.get(i, j) + 49.897).abs() < 1e-3);
        let m2 = compute_bpl_matrix(0, Vec3::default(), &[p.clone(), p], &g, &u, 20.0).unwrap();
        for (a, b) in m.values.iter().zip(&m2.values) {
            assert!((b - a - 10.0 * math::log10(2.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn no_paths_means_no_path_matrix() {
        let m = compute_bpl_matrix(0, Vec3::default(), &[], &Codebook::gnb_default(), &Codebook::ue_default(), 20.0).unwrap();
        assert_eq!(m.values.len(), NUM_CLASSES);
        assert!(m.is_no_path());
        assert!(!is_covered(&m, -174.0));
        assert!(top_k(&m, 5).is_empty());
    }

    #[test]
    fn codebook_size_checked() {
        let small = crate::antenna::build_codebook(crate::antenna::Side::Gnb, (8, 8), 32, 0.5).unwrap();
        let err = compute_bpl_matrix(0, Vec3::default(), &[], &small, &Codebook::ue_default(), 20.0).unwrap_err();
        assert_eq!(err, Error::CodebookSize { expected: 64, got: 32 });
    }

    #[test]
    fn top_k_rules() {
        let mut v = vec![-100.0; NUM_CLASSES];
        v[55] = -50.0;
        let l = top_k(&matrix(v), 5);
        assert_eq!(l[0].class_id, 3 * 16 + 7);
        assert_eq!(BplLabel::decode(55), (3, 7));
        assert_eq!(&l[1..].iter().map(|x| x.class_id).collect::<Vec<_>>(), &[0, 1, 2, 3]);

        let l = top_k(&matrix(vec![-80.0; NUM_CLASSES]), 5);
        assert_eq!(l.iter().map(|x| x.class_id).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);

        let mut v = vec![NO_PATH; NUM_CLASSES];
        v[9] = -70.0;
        v[3] = -60.0;
        let l = top_k(&matrix(v), 5);
        assert_eq!(l.iter().map(|x| x.class_id).collect::<Vec<_>>(), vec![3, 9]);
    }

    #[test]
    fn coverage_is_strict() {
        let mut v = vec![-200.0; NUM_CLASSES];
        v[0] = -174.0;
        assert!(!is_covered(&matrix(v.clone()), -174.0));
        v[1] = -50.0;
        assert!(is_covered(&matrix(v), -174.0));
    }
}
