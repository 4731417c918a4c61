//! Command-line interface.

use std::path::{Path, PathBuf};

use beampredict_core::antenna::Codebook;
use beampredict_core::dataset::BplDataset;
use beampredict_core::evaluation::{self, AccuracyMatrix, MatrixMode, MatrixSpec, SweepSpec};
use beampredict_core::geometry::{Rect, Vec2};
use beampredict_core::mlp::TrainConfig;
use beampredict_core::raytracer::Tracer;
use beampredict_core::scenario::{self, CityParams};
use beampredict_core::transfer::{self, Endpoint, TransferJob};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::formats::{self, DatasetFile};
use crate::manifest::{JobManifest, Profile, RunManifest};
use crate::pool::Pool;

#[derive(Debug, Parser)]
#[command(name = "beampredict", version, about = "Location-aided mm-wave beam prediction with cross-gNB transfer learning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic city scenario.
    Generate(GenerateArgs),
    /// Trace every gNB and write per-gNB datasets plus coverage statistics.
    Dataset(DatasetArgs),
    /// Train a reference model on one dataset.
    Train(TrainArgs),
    /// Train on a reference dataset and fine-tune on a target dataset.
    Transfer(TransferArgs),
    /// Zero-shot or fine-tuned accuracy matrix over gNB pairs.
    Matrix(MatrixArgs),
    /// Accuracy versus fine-tuning fraction for one pair.
    Sweep(SweepArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Generate(_) => "generate",
            Command::Dataset(_) => "dataset",
            Command::Train(_) => "train",
            Command::Transfer(_) => "transfer",
            Command::Matrix(_) => "matrix",
            Command::Sweep(_) => "sweep",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Output directory.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    /// Master seed; every random stream derives from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long, default_value_t = 1)]
    #[serde(skip)]
    pub jobs: usize,
    #[arg(long, value_enum, default_value_t = Profile::Paper)]
    pub profile: Profile,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Side of the square study area, meters.
    #[arg(long, default_value_t = 500.0)]
    pub area: f64,
    #[arg(long, default_value_t = 40)]
    pub buildings: usize,
    #[arg(long = "gnbs", default_value_t = 27)]
    pub gnb_count: usize,
    #[arg(long, default_value_t = 20.0)]
    pub min_building: f64,
    #[arg(long, default_value_t = 60.0)]
    pub max_building: f64,
    #[arg(long, default_value_t = 15.0)]
    pub min_height: f64,
    #[arg(long, default_value_t = 45.0)]
    pub max_height: f64,
    #[arg(long, default_value_t = 8.0)]
    pub street: f64,
    #[arg(long, default_value_t = 40.0)]
    pub gnb_spacing: f64,
    /// UE grid spacing, meters.
    #[arg(long, default_value_t = 1.0)]
    pub resolution: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DatasetArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    #[serde(skip)]
    pub scenario: PathBuf,
    /// gNB ids (comma separated); all when omitted.
    #[arg(long, value_delimiter = ',')]
    pub gnb: Vec<usize>,
    /// Also dump every traced path.
    #[arg(long)]
    pub paths: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainingArgs {
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub training: TrainingArgs,
    /// Dataset CSV (with its `.meta.json` sidecar).
    #[arg(long)]
    #[serde(skip)]
    pub dataset: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TransferArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub training: TrainingArgs,
    /// Job manifest; its first reference and first target are used.
    #[arg(long, conflicts_with_all = ["reference", "target"])]
    #[serde(skip)]
    pub manifest: Option<PathBuf>,
    #[arg(long, required_unless_present = "manifest")]
    #[serde(skip)]
    pub reference: Option<PathBuf>,
    #[arg(long, required_unless_present = "manifest")]
    #[serde(skip)]
    pub target: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    pub fine_tune_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub min_size: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Selection {
    /// Job manifest listing reference and target datasets.
    #[arg(long)]
    #[serde(skip)]
    pub manifest: Option<PathBuf>,
    /// Directory of `gnb_<id>.csv` datasets.
    #[arg(long)]
    #[serde(skip)]
    pub data: Option<PathBuf>,
    /// Reference gNB ids (default: every dataset in `--data`).
    #[arg(long, value_delimiter = ',')]
    pub gnb: Vec<usize>,
    /// Directory of target datasets for inter-city grids (defaults to `--data`).
    #[arg(long)]
    #[serde(skip)]
    pub target_data: Option<PathBuf>,
    /// Target gNB ids (default: the references, or every dataset in `--target-data`).
    #[arg(long, value_delimiter = ',')]
    pub target_gnb: Vec<usize>,
    /// Independent repetitions with seeds `seed, seed + 1, ...`.
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MatrixArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[command(flatten)]
    pub selection: Selection,
    #[arg(long, conflicts_with = "fine_tune_fraction")]
    pub zero_shot: bool,
    #[arg(long)]
    pub fine_tune_fraction: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub min_size: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[command(flatten)]
    pub selection: Selection,
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.25,0.5,0.75,1")]
    pub fractions: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub min_size: usize,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Dataset(a) => cmd_dataset(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Transfer(a) => cmd_transfer(&a),
        Command::Matrix(a) => cmd_matrix(&a),
        Command::Sweep(a) => cmd_sweep(&a),
    }
}

fn params<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).unwrap_or(serde_json::Value::Null)
}

fn training_config(profile: Profile, t: &TrainingArgs) -> Result<TrainConfig> {
    let mut cfg = profile.train_config();
    if let Some(e) = t.epochs {
        cfg.epochs = e;
    }
    if let Some(lr) = t.lr {
        cfg.initial_lr = lr;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn prepare_out(common: &Common) -> Result<Pool> {
    formats::create_dir(&common.out)?;
    Pool::new(common.jobs)
}

/// Short scenario label used in file names.
fn scenario_tag(fingerprint: u64) -> String {
    format!("s{:08x}", fingerprint >> 32)
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<()> {
    formats::create_dir(&a.common.out)?;
    let mut rf = scenario::RfConfig::default();
    a.common.profile.apply_rf(&mut rf);
    let p = CityParams {
        area: Rect::new(Vec2::new(0.0, 0.0), Vec2::new(a.area, a.area)),
        building_count: a.buildings,
        building_size_range: (a.min_building, a.max_building),
        building_height_range: (a.min_height, a.max_height),
        min_building_gap_m: a.street,
        gnb_count: a.gnb_count,
        min_gnb_spacing_m: a.gnb_spacing,
        grid_resolution_m: a.resolution,
        rf,
        seed: a.common.seed,
    };
    let s = scenario::generate_synthetic_city(&p)?;
    formats::save_scenario(&a.common.out.join("scenario.json"), &s)?;
    println!(
        "scenario {}: {} buildings, {} gNBs, {} UE grid points",
        scenario_tag(s.fingerprint()),
        s.buildings.len(),
        s.gnbs.len(),
        s.ue_grid().len()
    );
    RunManifest::new("generate", a.common.seed, a.common.profile, params(a)).finish(&a.common.out)
}

pub fn cmd_dataset(a: &DatasetArgs) -> Result<()> {
    let pool = prepare_out(&a.common)?;
    let out = &a.common.out;
    let mut s = formats::load_scenario(&a.scenario)?;
    a.common.profile.apply_rf(&mut s.rf);
    let ids: Vec<usize> = if a.gnb.is_empty() {
        s.gnbs.iter().map(|g| g.id).collect()
    } else {
        a.gnb.clone()
    };
    let mut coverage = Vec::new();
    for &id in &ids {
        let gnb = s
            .gnb(id)
            .ok_or_else(|| Error::Config(format!("scenario has no gNB {id}")))?
            .clone();
        let (d, cov) = evaluation::survey(&s, &gnb, &pool);
        formats::save_dataset(&out.join(format!("gnb_{id}.csv")), &d, &s.area, &s.rf)?;
        if a.paths {
            let tracer = Tracer::new(&s, gnb.position);
            let rows: Vec<_> = s
                .ue_grid()
                .into_iter()
                .map(|ue| (id, ue.xy(), tracer.trace_to(ue)))
                .collect();
            formats::save_paths(&out.join(format!("paths_gnb_{id}.csv")), &rows)?;
        }
        coverage.push(cov);
    }
    formats::save_coverage(&out.join("coverage.csv"), &coverage)?;
    formats::save_codebook(&out.join("codebook_gnb.csv"), &Codebook::gnb_default())?;
    formats::save_codebook(&out.join("codebook_ue.csv"), &Codebook::ue_default())?;

    println!("{:>5} {:>9} {:>7} {:>7} {:>7} {:>8}", "gNB", "covered%", "LoS%", "NLoS%", "points", "dataset");
    for c in &coverage {
        println!(
            "{:>5} {:>9.2} {:>7.2} {:>7.2} {:>7} {:>8}",
            c.gnb_id,
            100.0 * c.covered_fraction,
            100.0 * c.los_fraction,
            100.0 * c.nlos_fraction,
            c.grid_points,
            c.dataset_size
        );
    }
    let mut m = RunManifest::new("dataset", a.common.seed, a.common.profile, params(a));
    m.add_input(&a.scenario, out)?;
    m.finish(out)
}

pub fn cmd_train(a: &TrainArgs) -> Result<()> {
    prepare_out(&a.common)?;
    let out = &a.common.out;
    let cfg = training_config(a.common.profile, &a.training)?;
    let file = formats::load_dataset(&a.dataset)?;
    let norm = file.normalizer()?;
    let r = transfer::train_reference(&file.dataset, &norm, &cfg, a.common.seed)?;
    formats::save_checkpoint(&out.join("checkpoint.json"), &r.checkpoint)?;
    formats::save_history(&out.join("history.csv"), &r.checkpoint.history)?;
    formats::write_json(
        &out.join("report.json"),
        &json!({
            "gnb_id": file.dataset.gnb_id,
            "split": [r.split.train.len(), r.split.val.len(), r.split.test.len()],
            "test": r.baseline,
        }),
    )?;
    println!(
        "gNB {}: test top-1 {:.2}%, best-in-top-5 {:.2}% over {} samples",
        file.dataset.gnb_id,
        100.0 * r.baseline.top1,
        100.0 * r.baseline.best_in_top5,
        r.baseline.sample_count
    );
    let mut m = RunManifest::new("train", a.common.seed, a.common.profile, params(a));
    m.add_input(&a.dataset, out)?;
    m.finish(out)
}

fn endpoint(d: &BplDataset) -> Endpoint {
    Endpoint {
        scenario_id: scenario_tag(d.scenario_fingerprint),
        gnb_id: d.gnb_id,
    }
}

fn check_same_frame(a: &DatasetFile, b: &DatasetFile, path: &Path) -> Result<()> {
    if a.area != b.area {
        return Err(Error::format(path, "datasets were built in different study areas"));
    }
    Ok(())
}

pub fn cmd_transfer(a: &TransferArgs) -> Result<()> {
    prepare_out(&a.common)?;
    let out = &a.common.out;
    let mut a = a.clone();
    if let Some(path) = &a.manifest {
        let job = JobManifest::load(path)?;
        a.reference = job.references.first().cloned();
        a.target = job.targets.first().or(job.references.get(1)).cloned();
        if let Some(f) = job.fractions.first() {
            a.fine_tune_fraction = *f;
        }
        a.min_size = job.min_size;
        apply_job_overrides(&mut a.common, &mut a.training, &job);
    }
    let (rp, tp) = match (&a.reference, &a.target) {
        (Some(r), Some(t)) => (r.clone(), t.clone()),
        _ => return Err(Error::Config("need a reference and a target dataset".into())),
    };
    let cfg = training_config(a.common.profile, &a.training)?;
    let rf = formats::load_dataset(&rp)?;
    let tf = formats::load_dataset(&tp)?;
    check_same_frame(&rf, &tf, &tp)?;
    let job = TransferJob {
        reference: endpoint(&rf.dataset),
        target: endpoint(&tf.dataset),
        fine_tune_fraction: a.fine_tune_fraction,
        min_fine_tune_size: a.min_size,
        train_config: cfg.clone(),
        fine_tune_config: cfg,
        seed: a.common.seed,
        pair_index: 0,
    };
    let (result, w_x, w_y) = transfer::run_job(&job, &rf.dataset, &tf.dataset, &rf.normalizer()?)?;
    formats::save_checkpoint(&out.join("reference.ckpt.json"), &w_x)?;
    formats::save_checkpoint(&out.join("fine_tuned.ckpt.json"), &w_y)?;
    formats::write_json(
        &out.join("result.json"),
        &json!({
            "job": job,
            "result": result,
            "checkpoints": { "reference": "reference.ckpt.json", "fine_tuned": "fine_tuned.ckpt.json" },
        }),
    )?;
    println!(
        "{} gNB {} -> {} gNB {}: zero-shot top-1 {:.2}%, fine-tuned top-1 {:.2}% ({} samples)",
        result.reference.scenario_id,
        result.reference.gnb_id,
        result.target.scenario_id,
        result.target.gnb_id,
        100.0 * result.zero_shot.top1,
        100.0 * result.fine_tuned.top1,
        result.subset_size
    );
    let mut m = RunManifest::new("transfer", a.common.seed, a.common.profile, params(&a));
    m.add_input(&rp, out)?;
    m.add_input(&tp, out)?;
    m.finish(out)
}

fn apply_job_overrides(common: &mut Common, training: &mut TrainingArgs, job: &JobManifest) {
    if let Some(s) = job.seed {
        common.seed = s;
    }
    if let Some(p) = job.profile {
        common.profile = p;
    }
    if job.epochs.is_some() {
        training.epochs = job.epochs;
    }
    if job.lr.is_some() {
        training.lr = job.lr;
    }
}

/// Reference and target dataset paths from a manifest or `--data/--gnb`.
/// Ids of the `gnb_<id>.csv` files in `dir`, ascending.
fn gnbs_in(dir: &Path) -> Result<Vec<usize>> {
    let mut ids = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let name = entry.map_err(|e| Error::io(dir, e))?.file_name();
        let id = name
            .to_str()
            .and_then(|n| n.strip_prefix("gnb_")?.strip_suffix(".csv")?.parse::<usize>().ok());
        ids.extend(id);
    }
    if ids.is_empty() {
        return Err(Error::Config(format!("no gnb_<id>.csv datasets in {}", dir.display())));
    }
    ids.sort_unstable();
    Ok(ids)
}

/// Reference and target dataset paths. Without `--gnb` every dataset in
/// `--data` is used; without `--target-gnb` the targets are the references
/// (or every dataset in `--target-data`).
fn resolve(sel: &Selection) -> Result<(Vec<PathBuf>, Vec<PathBuf>)> {
    if let Some(path) = &sel.manifest {
        let job = JobManifest::load(path)?;
        let targets = if job.targets.is_empty() { job.references.clone() } else { job.targets };
        return Ok((job.references, targets));
    }
    let data = sel
        .data
        .as_ref()
        .ok_or_else(|| Error::Config("pass --manifest or --data".into()))?;
    let ids = if sel.gnb.is_empty() { gnbs_in(data)? } else { sel.gnb.clone() };
    let refs: Vec<PathBuf> = ids.iter().map(|g| data.join(format!("gnb_{g}.csv"))).collect();
    let tgts = match (&sel.target_data, sel.target_gnb.is_empty()) {
        (None, true) => refs.clone(),
        (dir, _) => {
            let tdir = dir.as_ref().unwrap_or(data);
            let ids = if sel.target_gnb.is_empty() { gnbs_in(tdir)? } else { sel.target_gnb.clone() };
            ids.iter().map(|g| tdir.join(format!("gnb_{g}.csv"))).collect()
        }
    };
    Ok((refs, tgts))
}

fn load_all(paths: &[PathBuf]) -> Result<Vec<DatasetFile>> {
    paths.iter().map(|p| formats::load_dataset(p)).collect()
}

fn pair_tag(refs: &[DatasetFile], tgts: &[DatasetFile]) -> String {
    let r = scenario_tag(refs[0].dataset.scenario_fingerprint);
    let t = scenario_tag(tgts[0].dataset.scenario_fingerprint);
    format!("{r}-{t}")
}

#[derive(Serialize)]
struct MatrixSummary<'a> {
    seed: u64,
    matrix: &'a AccuracyMatrix,
}

pub fn cmd_matrix(a: &MatrixArgs) -> Result<()> {
    let pool = prepare_out(&a.common)?;
    let out = &a.common.out;
    let mut a = a.clone();
    if let Some(path) = &a.selection.manifest {
        let job = JobManifest::load(path)?;
        a.zero_shot |= job.zero_shot;
        if a.fine_tune_fraction.is_none() && !job.zero_shot {
            a.fine_tune_fraction = job.fractions.first().copied();
        }
        a.min_size = job.min_size;
        if let Some(r) = job.repeats {
            a.selection.repeats = r;
        }
        apply_job_overrides(&mut a.common, &mut a.training, &job);
    }
    let mode = match (a.zero_shot, a.fine_tune_fraction) {
        (true, _) | (false, None) => MatrixMode::ZeroShot,
        (false, Some(fraction)) => MatrixMode::FineTune {
            fraction,
            min_size: a.min_size,
        },
    };
    let cfg = training_config(a.common.profile, &a.training)?;
    let (rpaths, tpaths) = resolve(&a.selection)?;
    let refs = load_all(&rpaths)?;
    let tgts = load_all(&tpaths)?;
    for t in &tgts {
        check_same_frame(&refs[0], t, &tpaths[0])?;
    }
    let norm = refs[0].normalizer()?;
    let rsets: Vec<&BplDataset> = refs.iter().map(|f| &f.dataset).collect();
    let tsets: Vec<&BplDataset> = tgts.iter().map(|f| &f.dataset).collect();
    let mode_tag = match mode {
        MatrixMode::ZeroShot => String::from("zeroshot"),
        MatrixMode::FineTune { fraction, min_size } => format!("ft{fraction}_min{min_size}"),
    };
    let tag = pair_tag(&refs, &tgts);
    let mut summaries = Vec::new();
    for r in 0..a.selection.repeats.max(1) {
        let seed = a.common.seed + r as u64;
        let spec = MatrixSpec {
            mode,
            train_config: cfg.clone(),
            fine_tune_config: cfg.clone(),
            master_seed: seed,
        };
        let m = evaluation::accuracy_matrix(&rsets, &tsets, &norm, &spec, &pool)?;
        let stem = format!("matrix_{tag}_{mode_tag}_seed{seed}");
        formats::save_matrix(&out.join(format!("{stem}_top1.csv")), &m, |c| c.report().top1)?;
        formats::save_matrix(&out.join(format!("{stem}_top5.csv")), &m, |c| c.report().best_in_top5)?;
        if matches!(mode, MatrixMode::FineTune { .. }) {
            formats::save_matrix(&out.join(format!("{stem}_zeroshot_top1.csv")), &m, |c| c.zero_shot.top1)?;
            formats::save_matrix(&out.join(format!("{stem}_zeroshot_top5.csv")), &m, |c| c.zero_shot.best_in_top5)?;
        }
        print_matrix(&m, seed);
        summaries.push((seed, m));
    }
    let body: Vec<MatrixSummary> = summaries.iter().map(|(seed, m)| MatrixSummary { seed: *seed, matrix: m }).collect();
    formats::write_json(&out.join(format!("matrix_{tag}_{mode_tag}_summary.json")), &body)?;
    let mut m = RunManifest::new("matrix", a.common.seed, a.common.profile, params(&a));
    for p in rpaths.iter().chain(&tpaths) {
        m.add_input(p, out)?;
    }
    m.finish(out)
}

fn print_matrix(m: &AccuracyMatrix, seed: u64) {
    println!("seed {seed}: top-1 accuracy (%), rows = reference, columns = target");
    print!("{:>6}", "");
    for t in &m.target_ids {
        print!(" {t:>7}");
    }
    println!();
    for r in 0..m.rows() {
        print!("{:>6}", m.reference_ids[r]);
        for c in 0..m.cols() {
            print!(" {:>7.2}", 100.0 * m.top1(r, c));
        }
        println!();
    }
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let pool = prepare_out(&a.common)?;
    let out = &a.common.out;
    let mut a = a.clone();
    if let Some(path) = &a.selection.manifest {
        let job = JobManifest::load(path)?;
        if !job.fractions.is_empty() {
            a.fractions = job.fractions.clone();
        }
        a.min_size = job.min_size;
        if let Some(r) = job.repeats {
            a.selection.repeats = r;
        }
        apply_job_overrides(&mut a.common, &mut a.training, &job);
    }
    let cfg = training_config(a.common.profile, &a.training)?;
    let (rpaths, tpaths) = resolve(&a.selection)?;
    let (rp, tp) = match (rpaths.first(), tpaths.iter().find(|t| Some(*t) != rpaths.first())) {
        (Some(r), Some(t)) => (r.clone(), t.clone()),
        _ => return Err(Error::Config("a sweep needs one reference and one distinct target".into())),
    };
    let rf = formats::load_dataset(&rp)?;
    let tf = formats::load_dataset(&tp)?;
    check_same_frame(&rf, &tf, &tp)?;
    let spec = SweepSpec {
        fractions: a.fractions.clone(),
        seeds: (0..a.selection.repeats.max(1) as u64).map(|r| a.common.seed + r).collect(),
        min_size: a.min_size,
        train_config: cfg.clone(),
        fine_tune_config: cfg,
    };
    let res = evaluation::fine_tune_sweep(&rf.dataset, &tf.dataset, &rf.normalizer()?, &spec, &pool)?;
    let stem = format!(
        "sweep_{}_gnb{}-gnb{}_seed{}",
        pair_tag(std::slice::from_ref(&rf), std::slice::from_ref(&tf)),
        rf.dataset.gnb_id,
        tf.dataset.gnb_id,
        a.common.seed
    );
    formats::save_curve(&out.join(format!("{stem}.csv")), &res)?;
    let curve: Vec<_> = res
        .mean_curve()
        .into_iter()
        .map(|(f, t1, t5)| json!({ "fraction": f, "top1": t1, "best_in_top5": t5 }))
        .collect();
    let (b1, b5) = res.baseline_mean();
    formats::write_json(
        &out.join(format!("{stem}_summary.json")),
        &json!({ "sweep": res, "mean_curve": curve, "baseline": { "top1": b1, "best_in_top5": b5 } }),
    )?;
    println!("fraction  top-1%  top-5%");
    for (f, t1, t5) in res.mean_curve() {
        println!("{:>8.2} {:>7.2} {:>7.2}", f, 100.0 * t1, 100.0 * t5);
    }
    println!("baseline {:>7.2} {:>7.2}", 100.0 * b1, 100.0 * b5);
    let mut m = RunManifest::new("sweep", a.common.seed, a.common.profile, params(&a));
    m.add_input(&rp, out)?;
    m.add_input(&tp, out)?;
    m.finish(out)
}
