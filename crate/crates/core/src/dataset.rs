//! Per-gNB beam-pair-link datasets, splits and fine-tuning subsets.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::antenna::Codebook;
use crate::exec::{self, Executor, Sequential};
use crate::geometry::{Rect, Vec2, Vec3};
use crate::math;
use crate::raytracer::{PathKind, Tracer};
use crate::rng;
use crate::rss::{self, BplMatrix, RssScratch};
use crate::scenario::{GnbSite, Scenario};
use crate::{Error, Result};

/// Labels per sample: the five strongest beam pairs.
pub const LABELS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BplSample {
    pub position: Vec2,
    /// Class ids, strongest first.
    pub labels: [usize; LABELS],
    pub label_rss: [f64; LABELS],
}

impl BplSample {
    pub fn best(&self) -> usize {
        self.labels[0]
    }

    pub fn check(&self) -> Result<()> {
        for i in 0..LABELS {
            if self.labels[i] >= rss::NUM_CLASSES {
                return Err(Error::LabelOutOfRange {
                    label: self.labels[i],
                    classes: rss::NUM_CLASSES,
                });
            }
            for j in i + 1..LABELS {
                if self.labels[i] == self.labels[j] {
                    return Err(Error::Invariant(format!("duplicate label {} in sample", self.labels[i])));
                }
            }
            if i > 0 && !(self.label_rss[i] <= self.label_rss[i - 1]) {
                return Err(Error::Invariant(format!("label rss must be non-increasing: {:?}", self.label_rss)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BplDataset {
    pub gnb_id: usize,
    pub scenario_fingerprint: u64,
    pub samples: Vec<BplSample>,
}

impl BplDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Same gNB and scenario, samples at `idx` in the given order.
    pub fn select(&self, idx: &[usize]) -> BplDataset {
        BplDataset {
            gnb_id: self.gnb_id,
            scenario_fingerprint: self.scenario_fingerprint,
            samples: idx.iter().map(|&i| self.samples[i].clone()).collect(),
        }
    }
}

/// What a single grid point contributes.
#[derive(Debug, Clone, PartialEq)]
pub struct PointOutcome {
    pub covered: bool,
    /// Strongest (lowest-loss) path is line of sight. False when uncovered.
    pub strongest_los: bool,
    pub sample: Option<BplSample>,
}

/// Per-gNB evaluator of grid points: the gNB's image tree plus codebooks.
/// Shareable across threads; each worker brings its own [`RssScratch`].
pub struct PointEvaluator<'a> {
    scenario: &'a Scenario,
    gnb: &'a GnbSite,
    tracer: Tracer<'a>,
    gnb_cb: Codebook,
    ue_cb: Codebook,
}

impl<'a> PointEvaluator<'a> {
    pub fn new(scenario: &'a Scenario, gnb: &'a GnbSite) -> Self {
        Self {
            scenario,
            gnb,
            tracer: Tracer::new(scenario, gnb.position),
            gnb_cb: Codebook::gnb_default(),
            ue_cb: Codebook::ue_default(),
        }
    }

    pub fn tracer(&self) -> &Tracer<'a> {
        &self.tracer
    }

    pub fn matrix(&self, ue: Vec3, scratch: &mut RssScratch) -> (BplMatrix, Option<PathKind>) {
        let paths = self.tracer.trace_to(ue);
        let mut m = BplMatrix {
            gnb_id: self.gnb.id,
            ue_position: ue,
            values: Vec::new(),
        };
        rss::compute_bpl_matrix_into(&mut m, &paths, &self.gnb_cb, &self.ue_cb, self.scenario.rf.tx_power_dbm, scratch)
            .expect("default codebooks have the required sizes");
        (m, paths.first().map(|p| p.kind))
    }

    pub fn evaluate(&self, ue: Vec3, scratch: &mut RssScratch) -> PointOutcome {
        let (m, strongest) = self.matrix(ue, scratch);
        if !rss::is_covered(&m, self.scenario.rf.rss_threshold_dbm) {
            return PointOutcome {
                covered: false,
                strongest_los: false,
                sample: None,
            };
        }
        let top = rss::top_k(&m, LABELS);
        let sample = if top.len() == LABELS {
            let mut labels = [0usize; LABELS];
            let mut label_rss = [0.0; LABELS];
            for (k, l) in top.iter().enumerate() {
                labels[k] = l.class_id;
                label_rss[k] = l.rss_dbm;
            }
            Some(BplSample {
                position: ue.xy(),
                labels,
                label_rss,
            })
        } else {
            None
        };
        PointOutcome {
            covered: true,
            strongest_los: strongest == Some(PathKind::LoS),
            sample,
        }
    }
}

/// Collects outcomes in grid order into a dataset.
pub fn assemble(scenario: &Scenario, gnb: &GnbSite, outcomes: impl IntoIterator<Item = PointOutcome>) -> BplDataset {
    BplDataset {
        gnb_id: gnb.id,
        scenario_fingerprint: scenario.fingerprint(),
        samples: outcomes.into_iter().filter_map(|o| o.sample).collect(),
    }
}

/// Grid points per executor task.
const SURVEY_CHUNK: usize = 512;

/// Outcome of every UE grid point, in grid order.
pub fn survey_points<E: Executor>(scenario: &Scenario, gnb: &GnbSite, exec: &E) -> Vec<PointOutcome> {
    let eval = PointEvaluator::new(scenario, gnb);
    let grid = scenario.ue_grid();
    let chunks = exec::chunk_ranges(grid.len(), grid.len().div_ceil(SURVEY_CHUNK));
    let parts = exec.map(chunks.len(), |c| {
        let mut scratch = RssScratch::default();
        grid[chunks[c].clone()]
            .iter()
            .map(|&p| eval.evaluate(p, &mut scratch))
            .collect::<Vec<_>>()
    });
    parts.into_iter().flatten().collect()
}

/// Traces every UE grid point, keeps covered points with their top-5 beam
/// pairs. Sample order follows the grid.
pub fn build_dataset(scenario: &Scenario, gnb: &GnbSite) -> BplDataset {
    build_dataset_with(scenario, gnb, &Sequential)
}

pub fn build_dataset_with<E: Executor>(scenario: &Scenario, gnb: &GnbSite, exec: &E) -> BplDataset {
    assemble(scenario, gnb, survey_points(scenario, gnb, exec))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub ratios: (f64, f64, f64),
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(seed: u64) -> Self {
        Self {
            ratios: (0.6, 0.2, 0.2),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b, c) = self.ratios;
        if !(a > 0.0 && b > 0.0 && c > 0.0) {
            return Err(Error::param("ratios", "must be positive"));
        }
        if ((a + b + c) - 1.0).abs() > 1e-9 {
            return Err(Error::param("ratios", format!("must sum to 1, got {}", a + b + c)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded permutation cut into train/val/test. Train and val sizes are
/// floored; test takes the remainder.
pub fn split_indices(n: usize, spec: &SplitSpec) -> Result<SplitIndices> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::EmptyDataset("cannot split an empty dataset".into()));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::rng_from_seed(spec.seed));
    let n_train = math::floor(spec.ratios.0 * n as f64 + 1e-9) as usize;
    let n_val = (math::floor(spec.ratios.1 * n as f64 + 1e-9) as usize).min(n - n_train);
    let test = idx.split_off(n_train + n_val);
    let val = idx.split_off(n_train);
    Ok(SplitIndices { train: idx, val, test })
}

pub fn split(dataset: &BplDataset, spec: &SplitSpec) -> Result<(BplDataset, BplDataset, BplDataset)> {
    let s = split_indices(dataset.len(), spec)?;
    Ok((dataset.select(&s.train), dataset.select(&s.val), dataset.select(&s.test)))
}

/// Target size of a fine-tuning subset: `max(ceil(fraction n), min_size)`,
/// capped at `n`.
pub fn subsample_size(n: usize, fraction: f64, min_size: usize) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::param("fraction", format!("must be in (0, 1], got {fraction}")));
    }
    // The epsilon keeps products like 0.07 * 100 from rounding up to 8.
    let by_fraction = math::ceil(fraction * n as f64 - 1e-9) as usize;
    Ok(by_fraction.max(min_size).min(n))
}

/// Uniform sample without replacement; indices ascending.
pub fn subsample_indices(n: usize, fraction: f64, min_size: usize, seed: u64) -> Result<Vec<usize>> {
    let k = subsample_size(n, fraction, min_size)?;
    if n == 0 {
        return Err(Error::EmptyDataset("cannot subsample an empty dataset".into()));
    }
    let mut rng = rng::rng_from_seed(seed);
    let mut idx = rand::seq::index::sample(&mut rng, n, k).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

pub fn subsample(dataset: &BplDataset, fraction: f64, min_size: usize, seed: u64) -> Result<BplDataset> {
    Ok(dataset.select(&subsample_indices(dataset.len(), fraction, min_size, seed)?))
}

/// Affine map of the study area onto the unit square. Shared by every gNB
/// of a study so positions keep one frame across transfers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub min: Vec2,
    pub max: Vec2,
}

impl Normalizer {
    pub fn from_area(area: &Rect) -> Result<Self> {
        if !(area.width() > 0.0 && area.height() > 0.0) {
            return Err(Error::Domain(format!("degenerate area {area:?}")));
        }
        Ok(Self { min: area.min, max: area.max })
    }

    #[inline]
    pub fn normalize(&self, p: Vec2) -> [f64; 2] {
        [
            (p.x - self.min.x) / (self.max.x - self.min.x),
            (p.y - self.min.y) / (self.max.y - self.min.y),
        ]
    }

    pub fn denormalize(&self, f: [f64; 2]) -> Vec2 {
        Vec2::new(
            self.min.x + f[0] * (self.max.x - self.min.x),
            self.min.y + f[1] * (self.max.y - self.min.y),
        )
    }

    /// Flattened `[x0, y0, x1, y1, ...]` features.
    pub fn features(&self, samples: &[BplSample]) -> Vec<f64> {
        let mut out = Vec::with_capacity(samples.len() * 2);
        for s in samples {
            out.extend_from_slice(&self.normalize(s.position));
        }
        out
    }
}

pub fn normalize_positions(samples: &[BplSample], area: &Rect) -> Result<Vec<[f64; 2]>> {
    let n = Normalizer::from_area(area)?;
    Ok(samples.iter().map(|s| n.normalize(s.position)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn dummy(n: usize) -> BplDataset {
        BplDataset {
            gnb_id: 0,
            scenario_fingerprint: 0,
            samples: (0..n)
                .map(|i| BplSample {
                    position: Vec2::new(i as f64, 0.0),
                    labels: [0, 1, 2, 3, 4],
                    label_rss: [-50.0, -51.0, -52.0, -53.0, -54.0],
                })
                .collect(),
        }
    }

    #[test]
    fn open_field_dataset_covers_grid() {
        let area = Rect::new(Vec2::new(0.0, 0.0), Vec2::new(10.0, 10.0));
        let s = Scenario::open_field(area, vec![GnbSite { id: 0, position: Vec3::new(0.0, 0.0, 10.0) }]);
        let d = build_dataset(&s, &s.gnbs[0]);
        assert_eq!(d.len(), 121);
        for smp in &d.samples {
            smp.check().unwrap();
        }
        assert_eq!(d, build_dataset(&s, &s.gnbs[0]));
    }

    #[test]
    fn split_sizes() {
        let s = split_indices(100, &SplitSpec::new(1)).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (60, 20, 20));
        let s = split_indices(101, &SplitSpec::new(1)).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (60, 20, 21));
        assert_eq!(s, split_indices(101, &SplitSpec::new(1)).unwrap());
        assert_ne!(s, split_indices(101, &SplitSpec::new(2)).unwrap());
        assert!(split(&dummy(0), &SplitSpec::new(1)).is_err());
        let bad = SplitSpec {
            ratios: (0.5, 0.2, 0.2),
            seed: 0,
        };
        assert!(split_indices(10, &bad).is_err());
    }

    #[test]
    fn subsample_sizes() {
        assert_eq!(subsample_size(59778, 0.05, 0).unwrap(), 2989);
        assert_eq!(subsample_size(6150, 0.05, 1000).unwrap(), 1000);
        assert_eq!(subsample_size(389, 0.05, 1000).unwrap(), 389);
        assert_eq!(subsample_size(100, 0.07, 0).unwrap(), 7);
        assert!(subsample_size(100, 0.0, 0).is_err());
        assert!(subsample_size(100, 1.5, 0).is_err());
        let d = dummy(389);
        let s = subsample(&d, 0.05, 1000, 3).unwrap();
        assert_eq!(s, d);
        assert!(subsample(&dummy(0), 0.5, 0, 1).is_err());
    }

    #[test]
    fn normalization() {
        let area = Rect::new(Vec2::new(0.0, 0.0), Vec2::new(500.0, 500.0));
        let n = Normalizer::from_area(&area).unwrap();
        assert_eq!(n.normalize(Vec2::new(0.0, 0.0)), [0.0, 0.0]);
        assert_eq!(n.normalize(Vec2::new(250.0, 250.0)), [0.5, 0.5]);
        let p = Vec2::new(123.456, 0.001);
        let q = n.denormalize(n.normalize(p));
        assert!((p.x - q.x).abs() < 1e-12 && (p.y - q.y).abs() < 1e-12);
        assert!(Normalizer::from_area(&Rect::new(Vec2::new(1.0, 1.0), Vec2::new(1.0, 5.0))).is_err());
    }

    #[test]
    fn sample_check() {
        let mut s = dummy(1).samples[0].clone();
        s.check().unwrap();
        s.labels[1] = 0;
        assert!(s.check().is_err());
        s.labels[1] = 2000;
        assert!(matches!(s.check(), Err(Error::LabelOutOfRange { .. })));
    }
}
