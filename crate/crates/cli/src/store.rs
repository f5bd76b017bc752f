//! On-disk layout under the output directory.
//!
//! ```text
//! datasets/<name>.csv, <name>.schema.json
//! groundtruth/<name>.json
//! curves/  models/  reports/
//! benchmark/fixed-m<m>/, benchmark/varying-m<min>-<max>/
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use databudget::curves::GroundTruth;
use databudget::tabular::{load_canonical, subsample_and_split, DatasetSplit, TabularDataset};
use serde::Serialize;

use crate::settings::Settings;

/// Rows sampled from each source dataset, and how many of them are test rows.
pub const SPLIT_TOTAL: usize = 3000;
pub const SPLIT_TEST: usize = 500;

pub struct Store {
    pub root: PathBuf,
}

impl Store {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Store { root: root.into() }
    }

    pub fn dir(&self, sub: &str) -> Result<PathBuf> {
        let d = self.root.join(sub);
        fs::create_dir_all(&d).with_context(|| format!("cannot create {}", d.display()))?;
        Ok(d)
    }

    pub fn datasets_dir(&self) -> PathBuf {
        self.root.join("datasets")
    }

    pub fn truth_path(&self, name: &str) -> PathBuf {
        self.root.join("groundtruth").join(format!("{name}.json"))
    }

    /// Stored dataset names, sorted.
    pub fn dataset_names(&self) -> Result<Vec<String>> {
        let dir = self.datasets_dir();
        if !dir.is_dir() {
            return Ok(Vec::new());
        }
        let mut names: Vec<String> = fs::read_dir(&dir)
            .with_context(|| format!("cannot list {}", dir.display()))?
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                e.file_name()
                    .to_str()
                    .and_then(|f| f.strip_suffix(".schema.json"))
                    .map(str::to_string)
            })
            .collect();
        names.sort();
        Ok(names)
    }

    pub fn load_dataset(&self, name: &str) -> Result<TabularDataset> {
        if !self
            .datasets_dir()
            .join(format!("{name}.schema.json"))
            .exists()
        {
            bail!(
                "dataset `{name}` is not in {}; run ingest or synth first",
                self.datasets_dir().display()
            );
        }
        Ok(load_canonical(self.datasets_dir(), name)?)
    }

    pub fn split(&self, name: &str, split_seed: u64) -> Result<DatasetSplit> {
        let ds = self.load_dataset(name)?;
        subsample_and_split(&ds, SPLIT_TOTAL, SPLIT_TEST, split_seed)
            .with_context(|| format!("cannot split dataset `{name}`"))
    }

    /// Cached ground truth, `Ok(None)` when absent, `Err` when unreadable.
    pub fn load_truth(&self, name: &str) -> Result<Option<GroundTruth>> {
        let p = self.truth_path(name);
        if !p.exists() {
            return Ok(None);
        }
        let text =
            fs::read_to_string(&p).with_context(|| format!("cannot read {}", p.display()))?;
        Ok(Some(GroundTruth::from_json(&text).with_context(|| {
            format!("corrupted ground-truth record {}", p.display())
        })?))
    }

    /// Datasets with a readable cached ground truth, with their splits.
    pub fn corpus(&self) -> Result<Vec<(String, DatasetSplit, GroundTruth)>> {
        let mut out = Vec::new();
        for name in self.dataset_names()? {
            if let Some(truth) = self.load_truth(&name)? {
                let split = self.split(&name, truth.split_seed)?;
                out.push((name, split, truth));
            }
        }
        if out.is_empty() {
            bail!(
                "no cached ground truth under {}; run groundtruth first",
                self.root.display()
            );
        }
        Ok(out)
    }
}

/// JSON document carrying the effective settings next to a result.
#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub format_version: u32,
    pub command: &'a str,
    pub settings: &'a Settings,
    pub result: T,
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .with_context(|| format!("cannot create {}", parent.display()))?;
    }
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_report<T: Serialize>(
    path: &Path,
    command: &str,
    settings: &Settings,
    result: T,
) -> Result<()> {
    let env = Envelope {
        format_version: databudget::FORMAT_VERSION,
        command,
        settings,
        result,
    };
    write_text(path, &(serde_json::to_string_pretty(&env)? + "\n"))
}

/// Stable 64-bit FNV-1a hash, used to key per-dataset seeds by name.
pub fn name_key(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}
