use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

/// Effective run configuration: defaults, overridden by a TOML file,
/// overridden by command-line flags. Written into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub seed: u64,
    pub out: PathBuf,
    /// Worker threads. Not written to reports.
    #[serde(skip_serializing)]
    pub jobs: Option<usize>,
    /// Pilot size for fixed-size commands.
    pub pilot_size: usize,
    pub curve_repetitions: usize,
    pub curve_step: usize,
    pub curve_trees: usize,
    pub truth_repetitions: usize,
    pub truth_trees: usize,
    pub model_trees: usize,
    pub benchmark_repetitions: usize,
    pub varying_min: usize,
    pub varying_max: usize,
    pub clusters: Option<usize>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            seed: 0,
            out: PathBuf::from("databudget-out"),
            jobs: None,
            pilot_size: 100,
            curve_repetitions: 500,
            curve_step: 1,
            curve_trees: 100,
            truth_repetitions: 10,
            truth_trees: 100,
            model_trees: 100,
            benchmark_repetitions: 40,
            varying_min: 100,
            varying_max: 400,
            clusters: None,
        }
    }
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Settings::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("cannot read config {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("invalid config {}", p.display()))
            }
        }
    }
}

/// Assign `flag` over `field` when given.
pub fn set<T>(field: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *field = v;
    }
}
