//! Run manifests, job manifests and output digests.

use std::fs;
use std::path::{Component, Path, PathBuf};

use beampredict_core::mlp::TrainConfig;
use beampredict_core::scenario::RfConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::formats;

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_FILE: &str = "manifest.json";

/// Learning rate of the practical profile.
pub const PRACTICAL_LR: f64 = 0.01;

/// `paper` keeps every published value. `practical` swaps the two values
/// that behave poorly on synthetic scenes: the -174 dBm coverage threshold
/// (-90 dBm instead) and the 0.2 initial learning rate (0.01 instead).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    #[default]
    Paper,
    Practical,
}

impl Profile {
    pub fn train_config(self) -> TrainConfig {
        match self {
            Profile::Paper => TrainConfig::default(),
            Profile::Practical => TrainConfig {
                initial_lr: PRACTICAL_LR,
                ..TrainConfig::default()
            },
        }
    }

    /// Applies the profile's coverage threshold to `rf`.
    pub fn apply_rf(self, rf: &mut RfConfig) {
        if self == Profile::Practical {
            rf.rss_threshold_dbm = RfConfig::PRACTICAL_THRESHOLD_DBM;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
}

/// Echo of one invocation, written last into its output directory. Paths
/// are relative to that directory so a replay elsewhere produces the same
/// bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub master_seed: u64,
    pub profile: Profile,
    pub inputs: Vec<String>,
    pub output_dir: String,
    pub parameters: serde_json::Value,
    pub outputs: Vec<OutputDigest>,
}

impl RunManifest {
    pub fn new(command: &str, master_seed: u64, profile: Profile, parameters: serde_json::Value) -> Self {
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            master_seed,
            profile,
            inputs: Vec::new(),
            output_dir: ".".into(),
            parameters,
            outputs: Vec::new(),
        }
    }

    pub fn add_input(&mut self, input: &Path, out_dir: &Path) -> Result<()> {
        self.inputs.push(relative_display(input, out_dir)?);
        Ok(())
    }

    /// Hashes every file in `out_dir` (except the manifest) and writes the
    /// manifest.
    pub fn finish(mut self, out_dir: &Path) -> Result<()> {
        self.outputs = digest_dir(out_dir)?;
        formats::write_json(&out_dir.join(MANIFEST_FILE), &self)
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Digests of the regular files directly in `dir`, sorted by name.
pub fn digest_dir(dir: &Path) -> Result<Vec<OutputDigest>> {
    let mut names = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let is_file = entry.file_type().map_err(|e| Error::io(&entry.path(), e))?.is_file();
        let name = entry.file_name().to_string_lossy().into_owned();
        if is_file && name != MANIFEST_FILE {
            names.push(name);
        }
    }
    names.sort();
    names
        .into_iter()
        .map(|name| {
            Ok(OutputDigest {
                sha256: sha256_file(&dir.join(&name))?,
                file: name,
            })
        })
        .collect()
}

fn absolute(path: &Path) -> Result<PathBuf> {
    fs::canonicalize(path).map_err(|e| Error::io(path, e))
}

/// `path` relative to directory `base`, with `/` separators.
pub fn relative_display(path: &Path, base: &Path) -> Result<String> {
    let path = absolute(path)?;
    let base = absolute(base)?;
    let p: Vec<Component> = path.components().collect();
    let b: Vec<Component> = base.components().collect();
    let common = p.iter().zip(&b).take_while(|(x, y)| x == y).count();
    let mut parts: Vec<String> = vec![String::from(".."); b.len() - common];
    parts.extend(p[common..].iter().map(|c| c.as_os_str().to_string_lossy().into_owned()));
    Ok(if parts.is_empty() { String::from(".") } else { parts.join("/") })
}

/// Pairs, fractions and seeds for `transfer`, `matrix` and `sweep`. Dataset
/// paths are relative to the manifest file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobManifest {
    pub references: Vec<PathBuf>,
    #[serde(default)]
    pub targets: Vec<PathBuf>,
    #[serde(default)]
    pub fractions: Vec<f64>,
    #[serde(default)]
    pub min_size: usize,
    #[serde(default)]
    pub zero_shot: bool,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub repeats: Option<usize>,
    #[serde(default)]
    pub epochs: Option<usize>,
    #[serde(default)]
    pub lr: Option<f64>,
    #[serde(default)]
    pub profile: Option<Profile>,
}

impl JobManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let mut m: JobManifest = formats::read_json(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in m.references.iter_mut().chain(m.targets.iter_mut()) {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a/b");
        let c = dir.path().join("c");
        fs::create_dir_all(&a).unwrap();
        fs::create_dir_all(&c).unwrap();
        fs::write(a.join("f.csv"), "x").unwrap();
        assert_eq!(relative_display(&a.join("f.csv"), &c).unwrap(), "../a/b/f.csv");
        assert_eq!(relative_display(&c, &c).unwrap(), ".");
    }
}
