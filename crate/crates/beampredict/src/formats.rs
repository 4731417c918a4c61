//! On-disk formats: scenario JSON, dataset CSV with a metadata sidecar,
//! checkpoint JSON and assorted CSV tables.
//!
//! Floats are written in Rust's shortest round-trip notation, so every
//! format reads back bit for bit.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use beampredict_core::antenna::Codebook;
use beampredict_core::dataset::{BplDataset, BplSample, Normalizer, LABELS};
use beampredict_core::evaluation::{AccuracyMatrix, GnbCoverage, MatrixCell, SweepResult};
use beampredict_core::geometry::{Rect, Vec2};
use beampredict_core::mlp::{EpochRecord, MlpModel, TrainConfig};
use beampredict_core::raytracer::{PathKind, PropagationPath};
use beampredict_core::scenario::{RfConfig, Scenario};
use beampredict_core::transfer::Checkpoint;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            create_dir(parent)?;
        }
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::json(path, e))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(f)).map_err(|e| Error::json(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::WriterBuilder::new().from_writer(create(path)?))
}

fn finish(path: &Path, mut w: csv::Writer<BufWriter<File>>) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_row<I, S>(path: &Path, w: &mut csv::Writer<BufWriter<File>>, row: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    w.write_record(row).map_err(|e| Error::csv(path, e))
}

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

// Scenario

pub fn save_scenario(path: &Path, s: &Scenario) -> Result<()> {
    write_json(path, s)
}

/// Loads and validates a scenario; every violation is reported.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let s: Scenario = read_json(path)?;
    let violations = s.violations();
    if violations.is_empty() {
        Ok(s)
    } else {
        Err(Error::InvalidScenario {
            path: path.to_path_buf(),
            violations,
        })
    }
}

// Dataset

pub const DATASET_FORMAT: &str = "beampredict-dataset";
pub const CHECKPOINT_FORMAT: &str = "beampredict-checkpoint";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub format: String,
    pub version: u32,
    pub gnb_id: usize,
    pub scenario_fingerprint: u64,
    pub sample_count: usize,
    pub area: Rect,
    pub rf: RfConfig,
}

/// A dataset with the study-area frame it was built in.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetFile {
    pub dataset: BplDataset,
    pub area: Rect,
    pub rf: RfConfig,
}

impl DatasetFile {
    pub fn normalizer(&self) -> Result<Normalizer> {
        Ok(Normalizer::from_area(&self.area)?)
    }
}

/// `<csv stem>.meta.json` next to the CSV.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    let stem = csv_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    csv_path.with_file_name(format!("{stem}.meta.json"))
}

pub fn dataset_header() -> Vec<String> {
    let mut h = vec![String::from("x_m"), String::from("y_m")];
    h.extend((1..=LABELS).map(|k| format!("label{k}")));
    h.extend((1..=LABELS).map(|k| format!("rss{k}")));
    h
}

pub fn save_dataset(path: &Path, d: &BplDataset, area: &Rect, rf: &RfConfig) -> Result<()> {
    let mut w = csv_writer(path)?;
    csv_row(path, &mut w, dataset_header())?;
    for s in &d.samples {
        let mut row = Vec::with_capacity(2 + 2 * LABELS);
        row.push(fmt_f64(s.position.x));
        row.push(fmt_f64(s.position.y));
        row.extend(s.labels.iter().map(|l| l.to_string()));
        row.extend(s.label_rss.iter().map(|&r| fmt_f64(r)));
        csv_row(path, &mut w, row)?;
    }
    finish(path, w)?;
    let meta = DatasetMeta {
        format: DATASET_FORMAT.into(),
        version: FORMAT_VERSION,
        gnb_id: d.gnb_id,
        scenario_fingerprint: d.scenario_fingerprint,
        sample_count: d.len(),
        area: *area,
        rf: rf.clone(),
    };
    write_json(&sidecar_path(path), &meta)
}

pub fn load_dataset(path: &Path) -> Result<DatasetFile> {
    let meta_path = sidecar_path(path);
    let meta: DatasetMeta = read_json(&meta_path)?;
    if meta.format != DATASET_FORMAT || meta.version != FORMAT_VERSION {
        return Err(Error::format(
            &meta_path,
            format!("expected {DATASET_FORMAT} v{FORMAT_VERSION}, found {} v{}", meta.format, meta.version),
        ));
    }
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| Error::csv(path, e))?
        .iter()
        .map(String::from)
        .collect();
    if header != dataset_header() {
        return Err(Error::format(path, format!("unexpected header {header:?}")));
    }
    let mut samples = Vec::with_capacity(meta.sample_count);
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let row = line + 2;
        let bad = |what: &str| Error::format(path, format!("line {row}: bad {what}"));
        let f = |i: usize| -> Result<f64> { rec.get(i).and_then(|v| v.parse().ok()).ok_or_else(|| bad("number")) };
        let mut labels = [0usize; LABELS];
        let mut label_rss = [0.0; LABELS];
        for k in 0..LABELS {
            labels[k] = rec.get(2 + k).and_then(|v| v.parse().ok()).ok_or_else(|| bad("label"))?;
            label_rss[k] = f(2 + LABELS + k)?;
        }
        let sample = BplSample {
            position: Vec2::new(f(0)?, f(1)?),
            labels,
            label_rss,
        };
        sample.check().map_err(|e| Error::format(path, format!("line {row}: {e}")))?;
        samples.push(sample);
    }
    if samples.len() != meta.sample_count {
        return Err(Error::format(
            path,
            format!("{} samples, metadata says {}", samples.len(), meta.sample_count),
        ));
    }
    Ok(DatasetFile {
        dataset: BplDataset {
            gnb_id: meta.gnb_id,
            scenario_fingerprint: meta.scenario_fingerprint,
            samples,
        },
        area: meta.area,
        rf: meta.rf,
    })
}

// Checkpoint

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    /// Row-major, `in x out`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointFile {
    pub format: String,
    pub version: u32,
    pub layer_dims: Vec<usize>,
    pub layers: Vec<LayerParams>,
    pub init_seed: u64,
    pub normalizer: Normalizer,
    pub config: TrainConfig,
    pub history: Vec<EpochRecord>,
    pub gnb_id: usize,
    pub scenario_fingerprint: u64,
}

impl From<&Checkpoint> for CheckpointFile {
    fn from(c: &Checkpoint) -> Self {
        let m = &c.model;
        let layers = (0..m.layers())
            .map(|l| {
                let (din, dout) = (m.dims[l], m.dims[l + 1]);
                let w = m.layer_offset(l);
                LayerParams {
                    weights: m.params[w..w + din * dout].to_vec(),
                    biases: m.params[w + din * dout..w + din * dout + dout].to_vec(),
                }
            })
            .collect();
        Self {
            format: CHECKPOINT_FORMAT.into(),
            version: FORMAT_VERSION,
            layer_dims: m.dims.clone(),
            layers,
            init_seed: m.seed,
            normalizer: c.normalizer,
            config: c.config.clone(),
            history: c.history.clone(),
            gnb_id: c.gnb_id,
            scenario_fingerprint: c.scenario_fingerprint,
        }
    }
}

impl CheckpointFile {
    pub fn into_checkpoint(self, path: &Path) -> Result<Checkpoint> {
        if self.format != CHECKPOINT_FORMAT || self.version != FORMAT_VERSION {
            return Err(Error::format(
                path,
                format!("expected {CHECKPOINT_FORMAT} v{FORMAT_VERSION}, found {} v{}", self.format, self.version),
            ));
        }
        let dims = self.layer_dims;
        if self.layers.len() + 1 != dims.len() {
            return Err(Error::format(path, "layer count does not match layer_dims"));
        }
        let mut params = Vec::with_capacity(MlpModel::param_count(&dims));
        for (l, layer) in self.layers.into_iter().enumerate() {
            if layer.weights.len() != dims[l] * dims[l + 1] || layer.biases.len() != dims[l + 1] {
                return Err(Error::format(path, format!("layer {l} has the wrong shape")));
            }
            params.extend(layer.weights);
            params.extend(layer.biases);
        }
        let mut model = MlpModel::zeros(&dims)?;
        model.params = params;
        model.seed = self.init_seed;
        model.check_finite()?;
        Ok(Checkpoint {
            model,
            normalizer: self.normalizer,
            config: self.config,
            history: self.history,
            gnb_id: self.gnb_id,
            scenario_fingerprint: self.scenario_fingerprint,
        })
    }
}

pub fn save_checkpoint(path: &Path, c: &Checkpoint) -> Result<()> {
    write_json(path, &CheckpointFile::from(c))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    read_json::<CheckpointFile>(path)?.into_checkpoint(path)
}

// Tables

pub fn save_history(path: &Path, history: &[EpochRecord]) -> Result<()> {
    let mut w = csv_writer(path)?;
    csv_row(path, &mut w, ["epoch", "lr", "train_loss", "val_top1"])?;
    for h in history {
        csv_row(
            path,
            &mut w,
            [
                h.epoch.to_string(),
                fmt_f64(h.lr),
                fmt_f64(h.train_loss),
                h.val_top1.map(fmt_f64).unwrap_or_default(),
            ],
        )?;
    }
    finish(path, w)
}

pub fn save_paths(path: &Path, rows: &[(usize, Vec2, Vec<PropagationPath>)]) -> Result<()> {
    let mut w = csv_writer(path)?;
    csv_row(
        path,
        &mut w,
        [
            "gnb_id", "ue_x", "ue_y", "kind", "bounces", "length_m", "path_loss_db", "aod_az", "aod_el", "aoa_az", "aoa_el",
        ],
    )?;
    for (gnb, ue, paths) in rows {
        for p in paths {
            let kind = match p.kind {
                PathKind::LoS => "LoS",
                PathKind::NLoS => "NLoS",
            };
            csv_row(
                path,
                &mut w,
                [
                    gnb.to_string(),
                    fmt_f64(ue.x),
                    fmt_f64(ue.y),
                    kind.to_string(),
                    p.bounces.to_string(),
                    fmt_f64(p.length_m),
                    fmt_f64(p.path_loss_db),
                    fmt_f64(p.aod.0),
                    fmt_f64(p.aod.1),
                    fmt_f64(p.aoa.0),
                    fmt_f64(p.aoa.1),
                ],
            )?;
        }
    }
    finish(path, w)
}

pub fn save_codebook(path: &Path, cb: &Codebook) -> Result<()> {
    let mut w = csv_writer(path)?;
    csv_row(path, &mut w, ["beam_id", "az_deg", "el_deg"])?;
    for (i, (az, el)) in cb.entries.iter().enumerate() {
        csv_row(path, &mut w, [i.to_string(), fmt_f64(*az), fmt_f64(*el)])?;
    }
    finish(path, w)
}

pub fn save_coverage(path: &Path, rows: &[GnbCoverage]) -> Result<()> {
    let mut w = csv_writer(path)?;
    csv_row(
        path,
        &mut w,
        [
            "gnb_id",
            "grid_points",
            "covered",
            "los",
            "covered_fraction",
            "los_fraction",
            "nlos_fraction",
            "dataset_size",
        ],
    )?;
    for c in rows {
        csv_row(
            path,
            &mut w,
            [
                c.gnb_id.to_string(),
                c.grid_points.to_string(),
                c.covered.to_string(),
                c.los.to_string(),
                fmt_f64(c.covered_fraction),
                fmt_f64(c.los_fraction),
                fmt_f64(c.nlos_fraction),
                c.dataset_size.to_string(),
            ],
        )?;
    }
    finish(path, w)
}

/// One matrix as CSV: a `reference` column, then one column per target.
pub fn save_matrix(path: &Path, m: &AccuracyMatrix, value: impl Fn(&MatrixCell) -> f64) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec![String::from("reference")];
    header.extend(m.target_ids.iter().map(|t| format!("target_{t}")));
    csv_row(path, &mut w, header)?;
    for (r, row) in m.grid(value).into_iter().enumerate() {
        let mut rec = vec![m.reference_ids[r].to_string()];
        rec.extend(row.into_iter().map(fmt_f64));
        csv_row(path, &mut w, rec)?;
    }
    finish(path, w)
}

pub fn save_curve(path: &Path, sweep: &SweepResult) -> Result<()> {
    let mut w = csv_writer(path)?;
    csv_row(path, &mut w, ["series", "seed", "fraction", "subset_size", "top1", "best_in_top5"])?;
    for p in &sweep.points {
        csv_row(
            path,
            &mut w,
            [
                String::from("transfer"),
                p.seed.to_string(),
                fmt_f64(p.fraction),
                p.subset_size.to_string(),
                fmt_f64(p.report.top1),
                fmt_f64(p.report.best_in_top5),
            ],
        )?;
    }
    for b in &sweep.baselines {
        csv_row(
            path,
            &mut w,
            [
                String::from("baseline"),
                b.seed.to_string(),
                String::new(),
                b.report.sample_count.to_string(),
                fmt_f64(b.report.top1),
                fmt_f64(b.report.best_in_top5),
            ],
        )?;
    }
    finish(path, w)
}
