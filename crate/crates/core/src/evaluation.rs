//! Accuracy metrics, generalization and transfer matrices, coverage
//! statistics and fine-tuning sweeps.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{self, BplDataset, Normalizer, PointOutcome};
use crate::exec::Executor;
use crate::mlp::{Examples, MlpModel, TrainConfig, K};
use crate::rng::{derive_seed, stream};
use crate::scenario::{GnbSite, Scenario};
use crate::transfer::{self, Endpoint, TrainedReference, TransferJob};
use crate::{math, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub top1: f64,
    pub best_in_top5: f64,
    pub sample_count: usize,
}

/// Scores ranked predictions (best first, at least one per sample) against
/// label sets. Best-in-top-5 looks at the first five predictions.
pub fn score_predictions(predictions: &[Vec<usize>], labels: &[[usize; K]]) -> Result<EvalReport> {
    if labels.is_empty() {
        return Err(Error::EmptyDataset("no samples to score".into()));
    }
    if predictions.len() != labels.len() {
        return Err(Error::Shape(format!("{} predictions for {} samples", predictions.len(), labels.len())));
    }
    let (mut t1, mut t5) = (0usize, 0usize);
    for (p, l) in predictions.iter().zip(labels) {
        if p.first() == Some(&l[0]) {
            t1 += 1;
        }
        if p.iter().take(5).any(|&c| c == l[0]) {
            t5 += 1;
        }
    }
    let n = labels.len() as f64;
    let report = EvalReport {
        top1: t1 as f64 / n,
        best_in_top5: t5 as f64 / n,
        sample_count: labels.len(),
    };
    debug_assert!(report.best_in_top5 >= report.top1);
    Ok(report)
}

pub fn evaluate(model: &MlpModel, data: &Examples) -> Result<EvalReport> {
    if data.is_empty() {
        return Err(Error::EmptyDataset("no samples to score".into()));
    }
    let m = 5.min(model.classes());
    let pred = model.predict_top_m_batch(&data.x, data.len(), m)?;
    score_predictions(&pred, &data.labels)
}

pub fn top1_accuracy(model: &MlpModel, test_set: &BplDataset, norm: &Normalizer) -> Result<f64> {
    Ok(evaluate(model, &transfer::examples(test_set, norm))?.top1)
}

pub fn best_in_top5_accuracy(model: &MlpModel, test_set: &BplDataset, norm: &Normalizer) -> Result<f64> {
    Ok(evaluate(model, &transfer::examples(test_set, norm))?.best_in_top5)
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, math::sqrt(var))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MatrixMode {
    ZeroShot,
    FineTune { fraction: f64, min_size: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSpec {
    pub mode: MatrixMode,
    pub train_config: TrainConfig,
    pub fine_tune_config: TrainConfig,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixCell {
    pub reference: usize,
    pub target: usize,
    /// Same gNB of the same scenario.
    pub diagonal: bool,
    /// Reference on the target's test split (its own baseline on the
    /// diagonal).
    pub zero_shot: EvalReport,
    pub fine_tuned: Option<EvalReport>,
    pub subset_size: usize,
}

impl MatrixCell {
    /// The entry the matrix reports for this cell.
    pub fn report(&self) -> &EvalReport {
        self.fine_tuned.as_ref().unwrap_or(&self.zero_shot)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyMatrix {
    pub reference_ids: Vec<usize>,
    pub target_ids: Vec<usize>,
    pub mode: MatrixMode,
    /// Row-major, one row per reference.
    pub cells: Vec<MatrixCell>,
}

impl AccuracyMatrix {
    pub fn rows(&self) -> usize {
        self.reference_ids.len()
    }

    pub fn cols(&self) -> usize {
        self.target_ids.len()
    }

    pub fn cell(&self, r: usize, c: usize) -> &MatrixCell {
        &self.cells[r * self.cols() + c]
    }

    pub fn top1(&self, r: usize, c: usize) -> f64 {
        self.cell(r, c).report().top1
    }

    pub fn best_in_top5(&self, r: usize, c: usize) -> f64 {
        self.cell(r, c).report().best_in_top5
    }

    /// Row-major grid of `f(cell)`.
    pub fn grid(&self, f: impl Fn(&MatrixCell) -> f64) -> Vec<Vec<f64>> {
        self.cells.chunks(self.cols().max(1)).map(|row| row.iter().map(&f).collect()).collect()
    }

    /// Mean of the reported top-1 over column `c`, off-diagonal cells only.
    pub fn column_mean_top1(&self, c: usize) -> Option<f64> {
        let v: Vec<f64> = (0..self.rows())
            .map(|r| self.cell(r, c))
            .filter(|cell| !cell.diagonal)
            .map(|cell| cell.report().top1)
            .collect();
        if v.is_empty() {
            None
        } else {
            Some(mean_std(&v).0)
        }
    }
}

/// Trains one reference per dataset, in parallel.
pub fn train_references<E: Executor>(
    sets: &[&BplDataset],
    norm: &Normalizer,
    cfg: &TrainConfig,
    master_seed: u64,
    exec: &E,
) -> Result<Vec<TrainedReference>> {
    exec.map(sets.len(), |i| transfer::train_reference(sets[i], norm, cfg, master_seed))
        .into_iter()
        .collect()
}

fn same_gnb(a: &BplDataset, b: &BplDataset) -> bool {
    a.gnb_id == b.gnb_id && a.scenario_fingerprint == b.scenario_fingerprint
}

/// Trains references for `refs` and fills the grid against `tgts`. Pass the
/// same list twice for an intra-city grid.
pub fn accuracy_matrix<E: Executor>(
    refs: &[&BplDataset],
    tgts: &[&BplDataset],
    norm: &Normalizer,
    spec: &MatrixSpec,
    exec: &E,
) -> Result<AccuracyMatrix> {
    if refs.is_empty() || tgts.is_empty() {
        return Err(Error::param("gnbs", "need at least one reference and one target"));
    }
    let references = train_references(refs, norm, &spec.train_config, spec.master_seed, exec)?;
    accuracy_matrix_from(&references, refs, tgts, spec, exec)
}

/// As [`accuracy_matrix`] with references trained beforehand (one per
/// entry of `refs`, same master seed and train config).
pub fn accuracy_matrix_from<E: Executor>(
    references: &[TrainedReference],
    refs: &[&BplDataset],
    tgts: &[&BplDataset],
    spec: &MatrixSpec,
    exec: &E,
) -> Result<AccuracyMatrix> {
    if references.len() != refs.len() {
        return Err(Error::Shape(format!("{} references for {} datasets", references.len(), refs.len())));
    }
    let cols = tgts.len();
    let cells: Vec<Result<MatrixCell>> = exec.map(refs.len() * cols, |k| {
        let (r, c) = (k / cols, k % cols);
        let reference = &references[r];
        let (d_x, d_y) = (refs[r], tgts[c]);
        if same_gnb(d_x, d_y) {
            return Ok(MatrixCell {
                reference: d_x.gnb_id,
                target: d_y.gnb_id,
                diagonal: true,
                zero_shot: reference.baseline.clone(),
                fine_tuned: None,
                subset_size: 0,
            });
        }
        match spec.mode {
            MatrixMode::ZeroShot => Ok(MatrixCell {
                reference: d_x.gnb_id,
                target: d_y.gnb_id,
                diagonal: false,
                zero_shot: transfer::zero_shot_eval(&reference.checkpoint, d_y, spec.master_seed)?,
                fine_tuned: None,
                subset_size: 0,
            }),
            MatrixMode::FineTune { fraction, min_size } => {
                let job = TransferJob {
                    reference: Endpoint {
                        scenario_id: format!("{:016x}", d_x.scenario_fingerprint),
                        gnb_id: d_x.gnb_id,
                    },
                    target: Endpoint {
                        scenario_id: format!("{:016x}", d_y.scenario_fingerprint),
                        gnb_id: d_y.gnb_id,
                    },
                    fine_tune_fraction: fraction,
                    min_fine_tune_size: min_size,
                    train_config: spec.train_config.clone(),
                    fine_tune_config: spec.fine_tune_config.clone(),
                    seed: spec.master_seed,
                    pair_index: k as u64,
                };
                let (res, _) = transfer::transfer_from(reference, &job, d_y)?;
                Ok(MatrixCell {
                    reference: d_x.gnb_id,
                    target: d_y.gnb_id,
                    diagonal: false,
                    zero_shot: res.zero_shot,
                    fine_tuned: Some(res.fine_tuned),
                    subset_size: res.subset_size,
                })
            }
        }
    });
    Ok(AccuracyMatrix {
        reference_ids: refs.iter().map(|d| d.gnb_id).collect(),
        target_ids: tgts.iter().map(|d| d.gnb_id).collect(),
        mode: spec.mode,
        cells: cells.into_iter().collect::<Result<_>>()?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnbCoverage {
    pub gnb_id: usize,
    pub grid_points: usize,
    pub covered: usize,
    pub los: usize,
    pub covered_fraction: f64,
    pub los_fraction: f64,
    pub nlos_fraction: f64,
    pub dataset_size: usize,
}

impl GnbCoverage {
    pub fn from_outcomes(gnb_id: usize, outcomes: &[PointOutcome]) -> Self {
        let grid_points = outcomes.len();
        let covered = outcomes.iter().filter(|o| o.covered).count();
        let los = outcomes.iter().filter(|o| o.covered && o.strongest_los).count();
        let dataset_size = outcomes.iter().filter(|o| o.sample.is_some()).count();
        let frac = |k: usize| if grid_points == 0 { 0.0 } else { k as f64 / grid_points as f64 };
        Self {
            gnb_id,
            grid_points,
            covered,
            los,
            covered_fraction: frac(covered),
            los_fraction: frac(los),
            nlos_fraction: frac(covered - los),
            dataset_size,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageStats {
    pub per_gnb: Vec<GnbCoverage>,
}

/// Dataset and coverage of one gNB from a single pass over the grid.
pub fn survey<E: Executor>(scenario: &Scenario, gnb: &GnbSite, exec: &E) -> (BplDataset, GnbCoverage) {
    let outcomes = dataset::survey_points(scenario, gnb, exec);
    let cov = GnbCoverage::from_outcomes(gnb.id, &outcomes);
    (dataset::assemble(scenario, gnb, outcomes), cov)
}

pub fn coverage_stats<E: Executor>(scenario: &Scenario, exec: &E) -> CoverageStats {
    CoverageStats {
        per_gnb: scenario
            .gnbs
            .iter()
            .map(|g| GnbCoverage::from_outcomes(g.id, &dataset::survey_points(scenario, g, exec)))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub fractions: Vec<f64>,
    pub seeds: Vec<u64>,
    pub min_size: usize,
    pub train_config: TrainConfig,
    pub fine_tune_config: TrainConfig,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if let Some(f) = self.fractions.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
            return Err(Error::param("fractions", format!("must lie in (0, 1], got {f}")));
        }
        if self.fractions.is_empty() || self.seeds.is_empty() {
            return Err(Error::param("sweep", "needs at least one fraction and one seed"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub seed: u64,
    pub fraction: f64,
    pub subset_size: usize,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselinePoint {
    pub seed: u64,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub reference_gnb: usize,
    pub target_gnb: usize,
    /// Seed-major, fractions in spec order.
    pub points: Vec<CurvePoint>,
    /// Target-only model trained from scratch on the full target dataset.
    pub baselines: Vec<BaselinePoint>,
}

impl SweepResult {
    /// `(fraction, mean top-1, mean best-in-top-5)` over seeds, in
    /// first-seen fraction order.
    pub fn mean_curve(&self) -> Vec<(f64, f64, f64)> {
        let mut fractions: Vec<f64> = Vec::new();
        for p in &self.points {
            if !fractions.contains(&p.fraction) {
                fractions.push(p.fraction);
            }
        }
        fractions
            .into_iter()
            .map(|f| {
                let pts: Vec<&CurvePoint> = self.points.iter().filter(|p| p.fraction == f).collect();
                let t1: Vec<f64> = pts.iter().map(|p| p.report.top1).collect();
                let t5: Vec<f64> = pts.iter().map(|p| p.report.best_in_top5).collect();
                (f, mean_std(&t1).0, mean_std(&t5).0)
            })
            .collect()
    }

    pub fn baseline_mean(&self) -> (f64, f64) {
        let t1: Vec<f64> = self.baselines.iter().map(|b| b.report.top1).collect();
        let t5: Vec<f64> = self.baselines.iter().map(|b| b.report.best_in_top5).collect();
        (mean_std(&t1).0, mean_std(&t5).0)
    }
}

/// Fine-tunes a reference from `d_x` on every fraction of `d_y`, once per
/// seed, plus a from-scratch target baseline per seed.
pub fn fine_tune_sweep<E: Executor>(
    d_x: &BplDataset,
    d_y: &BplDataset,
    norm: &Normalizer,
    spec: &SweepSpec,
    exec: &E,
) -> Result<SweepResult> {
    spec.validate()?;
    let seeds = &spec.seeds;
    // Even task indices train references, odd ones target baselines.
    let trained: Vec<Result<TrainedReference>> = exec.map(seeds.len() * 2, |k| {
        let d = if k % 2 == 0 { d_x } else { d_y };
        transfer::train_reference(d, norm, &spec.train_config, seeds[k / 2])
    });
    let trained: Vec<TrainedReference> = trained.into_iter().collect::<Result<_>>()?;
    let nf = spec.fractions.len();
    let points: Vec<Result<CurvePoint>> = exec.map(seeds.len() * nf, |k| {
        let (s, f) = (k / nf, k % nf);
        let fraction = spec.fractions[f];
        let ft = transfer::fine_tune(
            &trained[2 * s].checkpoint,
            d_y,
            fraction,
            spec.min_size,
            &spec.fine_tune_config,
            derive_seed(seeds[s], stream::SWEEP, f as u64),
        )?;
        let report = evaluate(
            &ft.checkpoint.model,
            &transfer::examples(&d_y.select(&ft.held_out), norm),
        )?;
        Ok(CurvePoint {
            seed: seeds[s],
            fraction,
            subset_size: ft.subset.len(),
            report,
        })
    });
    Ok(SweepResult {
        reference_gnb: d_x.gnb_id,
        target_gnb: d_y.gnb_id,
        points: points.into_iter().collect::<Result<_>>()?,
        baselines: seeds
            .iter()
            .enumerate()
            .map(|(s, &seed)| BaselinePoint {
                seed,
                report: trained[2 * s + 1].baseline.clone(),
            })
            .collect(),
    })
}
