//! Reference training, zero-shot evaluation and fine-tuning across gNBs.
//!
//! Seeds: a reference model for dataset `D` under master seed `s` uses
//! `derive_seed(s, SPLIT | INIT | REFERENCE, gnb_id)`. A target's test
//! split is drawn the same way, so a reference scored on its own test split
//! and a transferred model scored zero-shot on that target see the same
//! samples. Fine-tuning streams hang off the job seed.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{self, BplDataset, Normalizer, SplitIndices, SplitSpec};
use crate::evaluation::{self, EvalReport};
use crate::mlp::{self, EpochRecord, Examples, MlpModel, TrainConfig, PAPER_DIMS};
use crate::rng::{derive_seed, stream};
use crate::{Error, Result};

/// Smallest dataset a reference model is trained on.
pub const MIN_REFERENCE_SIZE: usize = 10;

/// Trained parameters with everything needed to reuse them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub model: MlpModel,
    pub normalizer: Normalizer,
    pub config: TrainConfig,
    pub history: Vec<EpochRecord>,
    pub gnb_id: usize,
    pub scenario_fingerprint: u64,
}

impl Checkpoint {
    pub fn final_train_loss(&self) -> Option<f64> {
        self.history.last().map(|h| h.train_loss)
    }
}

/// Features and labels of `samples` in the normalizer's frame.
pub fn examples(ds: &BplDataset, norm: &Normalizer) -> Examples {
    Examples {
        dim: 2,
        x: norm.features(&ds.samples),
        labels: ds.samples.iter().map(|s| s.labels).collect(),
    }
}

/// The train/val/test split used for `ds` under `master_seed`.
pub fn reference_split(ds: &BplDataset, master_seed: u64) -> Result<SplitIndices> {
    dataset::split_indices(ds.len(), &SplitSpec::new(derive_seed(master_seed, stream::SPLIT, ds.gnb_id as u64)))
}

/// Test split of `ds` under `master_seed`.
pub fn test_split(ds: &BplDataset, master_seed: u64) -> Result<BplDataset> {
    Ok(ds.select(&reference_split(ds, master_seed)?.test))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedReference {
    pub checkpoint: Checkpoint,
    pub split: SplitIndices,
    /// The reference scored on its own test split.
    pub baseline: EvalReport,
}

/// Splits `D_x` 60/20/20, trains from a seeded initialization and scores the
/// result on the test split. `cfg.seed` is replaced by a derived one.
pub fn train_reference(d_x: &BplDataset, norm: &Normalizer, cfg: &TrainConfig, master_seed: u64) -> Result<TrainedReference> {
    if d_x.len() < MIN_REFERENCE_SIZE {
        return Err(Error::EmptyDataset(format!(
            "gNB {} has {} samples, a reference needs at least {MIN_REFERENCE_SIZE}",
            d_x.gnb_id,
            d_x.len()
        )));
    }
    let split = reference_split(d_x, master_seed)?;
    let key = d_x.gnb_id as u64;
    let init = MlpModel::init(&PAPER_DIMS, derive_seed(master_seed, stream::INIT, key))?;
    let cfg = TrainConfig {
        seed: derive_seed(master_seed, stream::REFERENCE, key),
        ..cfg.clone()
    };
    let train = examples(&d_x.select(&split.train), norm);
    let val = examples(&d_x.select(&split.val), norm);
    let (model, history) = mlp::train(&init, &train, Some(&val), &cfg)?;
    let test = examples(&d_x.select(&split.test), norm);
    let baseline = evaluation::evaluate(&model, &test)?;
    Ok(TrainedReference {
        checkpoint: Checkpoint {
            model,
            normalizer: *norm,
            config: cfg,
            history,
            gnb_id: d_x.gnb_id,
            scenario_fingerprint: d_x.scenario_fingerprint,
        },
        split,
        baseline,
    })
}

/// Scores `w_x` on `D_y`'s test split without touching its parameters.
pub fn zero_shot_eval(w_x: &Checkpoint, d_y: &BplDataset, master_seed: u64) -> Result<EvalReport> {
    let test = test_split(d_y, master_seed)?;
    evaluation::evaluate(&w_x.model, &examples(&test, &w_x.normalizer))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FineTuneOutcome {
    pub checkpoint: Checkpoint,
    /// Indices into `D_y` of the fine-tuning subset.
    pub subset: Vec<usize>,
    /// Split of the subset, indices into `subset`.
    pub split: SplitIndices,
    /// Indices into `D_y` never used for fine-tuning updates or validation.
    pub held_out: Vec<usize>,
}

impl FineTuneOutcome {
    pub fn subset_test(&self) -> Vec<usize> {
        self.split.test.iter().map(|&i| self.subset[i]).collect()
    }
}

fn check_transferable(w_x: &Checkpoint) -> Result<()> {
    if w_x.model.dims != PAPER_DIMS {
        return Err(Error::Shape(format!("checkpoint dims {:?} differ from {:?}", w_x.model.dims, PAPER_DIMS)));
    }
    w_x.model.check_finite()
}

/// Starts from `w_x`, draws `D~_y = subsample(D_y, fraction, min_size)`,
/// splits it 60/20/20 and trains on its train part with fresh optimizer
/// state. Fraction `0` returns `w_x` unchanged.
pub fn fine_tune(
    w_x: &Checkpoint,
    d_y: &BplDataset,
    fraction: f64,
    min_size: usize,
    ft_cfg: &TrainConfig,
    seed: u64,
) -> Result<FineTuneOutcome> {
    check_transferable(w_x)?;
    if d_y.is_empty() {
        return Err(Error::EmptyDataset(format!("target gNB {} has no samples", d_y.gnb_id)));
    }
    if fraction == 0.0 {
        return Ok(FineTuneOutcome {
            checkpoint: Checkpoint {
                history: Vec::new(),
                ..w_x.clone()
            },
            subset: Vec::new(),
            split: SplitIndices::default(),
            held_out: (0..d_y.len()).collect(),
        });
    }
    let subset = dataset::subsample_indices(d_y.len(), fraction, min_size, derive_seed(seed, stream::SUBSAMPLE, 0))?;
    let split = dataset::split_indices(subset.len(), &SplitSpec::new(derive_seed(seed, stream::SPLIT, 0)))?;
    let pick = |idx: &[usize]| d_y.select(&idx.iter().map(|&i| subset[i]).collect::<Vec<_>>());
    let train = examples(&pick(&split.train), &w_x.normalizer);
    let val = examples(&pick(&split.val), &w_x.normalizer);
    let cfg = TrainConfig {
        seed: derive_seed(seed, stream::TRANSFER, 0),
        ..ft_cfg.clone()
    };
    let (model, history) = if train.is_empty() {
        (w_x.model.clone(), Vec::new())
    } else {
        mlp::train(&w_x.model, &train, Some(&val), &cfg)?
    };
    let mut used = alloc::vec![false; d_y.len()];
    for &i in split.train.iter().chain(&split.val) {
        used[subset[i]] = true;
    }
    let held_out = (0..d_y.len()).filter(|&i| !used[i]).collect();
    Ok(FineTuneOutcome {
        checkpoint: Checkpoint {
            model,
            normalizer: w_x.normalizer,
            config: cfg,
            history,
            gnb_id: d_y.gnb_id,
            scenario_fingerprint: d_y.scenario_fingerprint,
        },
        subset,
        split,
        held_out,
    })
}

/// A reference or target: scenario label plus gNB id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Endpoint {
    pub scenario_id: String,
    pub gnb_id: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferJob {
    pub reference: Endpoint,
    pub target: Endpoint,
    pub fine_tune_fraction: f64,
    pub min_fine_tune_size: usize,
    pub train_config: TrainConfig,
    pub fine_tune_config: TrainConfig,
    /// Master seed of the study.
    pub seed: u64,
    /// Index of the pair, feeds the job's own seed stream.
    pub pair_index: u64,
}

impl TransferJob {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.fine_tune_fraction) {
            return Err(Error::param(
                "fine_tune_fraction",
                format!("must be in [0, 1], got {}", self.fine_tune_fraction),
            ));
        }
        self.train_config.validate()?;
        self.fine_tune_config.validate()
    }

    pub fn job_seed(&self) -> u64 {
        derive_seed(self.seed, stream::TRANSFER, self.pair_index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferResult {
    pub reference: Endpoint,
    pub target: Endpoint,
    pub fine_tune_fraction: f64,
    pub subset_size: usize,
    /// Reference scored on its own test split.
    pub reference_baseline: EvalReport,
    /// Reference scored on the target's test split.
    pub zero_shot: EvalReport,
    /// Fine-tuned model on the target samples it never trained or validated
    /// on. Equals `zero_shot` at fraction 0.
    pub fine_tuned: EvalReport,
    /// Fine-tuned model on the test part of the fine-tuning subset.
    pub fine_tuned_subset_test: Option<EvalReport>,
}

/// Fine-tunes an already trained reference on `d_y` and scores it.
pub fn transfer_from(
    reference: &TrainedReference,
    job: &TransferJob,
    d_y: &BplDataset,
) -> Result<(TransferResult, FineTuneOutcome)> {
    job.validate()?;
    let w_x = &reference.checkpoint;
    let zero_shot = zero_shot_eval(w_x, d_y, job.seed)?;
    let ft = fine_tune(
        w_x,
        d_y,
        job.fine_tune_fraction,
        job.min_fine_tune_size,
        &job.fine_tune_config,
        job.job_seed(),
    )?;
    let norm = &w_x.normalizer;
    let (fine_tuned, subset_test) = if job.fine_tune_fraction == 0.0 {
        (zero_shot.clone(), None)
    } else {
        let held = evaluation::evaluate(&ft.checkpoint.model, &examples(&d_y.select(&ft.held_out), norm))?;
        let st = ft.subset_test();
        let st = if st.is_empty() {
            None
        } else {
            Some(evaluation::evaluate(&ft.checkpoint.model, &examples(&d_y.select(&st), norm))?)
        };
        (held, st)
    };
    Ok((
        TransferResult {
            reference: job.reference.clone(),
            target: job.target.clone(),
            fine_tune_fraction: job.fine_tune_fraction,
            subset_size: ft.subset.len(),
            reference_baseline: reference.baseline.clone(),
            zero_shot,
            fine_tuned,
            fine_tuned_subset_test: subset_test,
        },
        ft,
    ))
}

/// Full two-step procedure for one pair: train on `D_x`, then transfer.
pub fn run_job(job: &TransferJob, d_x: &BplDataset, d_y: &BplDataset, norm: &Normalizer) -> Result<(TransferResult, Checkpoint, Checkpoint)> {
    job.validate()?;
    let reference = train_reference(d_x, norm, &job.train_config, job.seed)?;
    let (result, ft) = transfer_from(&reference, job, d_y)?;
    Ok((result, reference.checkpoint, ft.checkpoint))
}
