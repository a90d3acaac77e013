//! Run manifests.
//!
//! ```toml
//! [datasets]
//! names = ["Enron", "synthetic-period2"]
//! files = { MyGraph = "graphs/my.json" }   # explicit cache paths
//! max_nodes = { AS733 = 1000 }              # keep the highest-degree nodes
//!
//! [models]
//! archs = ["egcn", "dysat", "gclstm", "stgcn", "edgebank"]
//! hidden = 64                               # any Hyper field may be overridden
//!
//! [sweep]
//! grid = [1, 2, 3, "inf"]                   # default: 1..=min(T-1, 12) plus inf
//! seeds = 5
//! master_seed = 0
//! train_fraction = 0.7
//! parallelism = 0                           # worker threads, 0 = one per core
//!
//! [training]
//! epochs = 100
//! lr = 1e-3
//! negatives_per_positive = 1
//!
//! [output]
//! dir = "results"
//! record_wall_time = false
//! plots = false
//! emit_loss = false
//! ```
//!
//! Relative paths resolve against the directory holding the manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dtdg::Tau;
use crate::error::{Error, Result};
use crate::eval::{ExperimentConfig, TrainConfig};
use crate::models::{Arch, Hyper};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetsSection {
    pub names: Vec<String>,
    pub files: BTreeMap<String, PathBuf>,
    pub max_nodes: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelsSection {
    pub archs: Vec<Arch>,
    pub d_in: usize,
    pub hidden: usize,
    pub layers: usize,
    pub heads: usize,
    pub kernel: usize,
    pub max_positions: usize,
}

impl Default for ModelsSection {
    fn default() -> Self {
        let h = Hyper::default();
        Self {
            archs: Vec::new(),
            d_in: h.d_in,
            hidden: h.hidden,
            layers: h.layers,
            heads: h.heads,
            kernel: h.kernel,
            max_positions: h.max_positions,
        }
    }
}

impl ModelsSection {
    pub fn hyper(&self) -> Hyper {
        Hyper {
            d_in: self.d_in,
            hidden: self.hidden,
            layers: self.layers,
            heads: self.heads,
            kernel: self.kernel,
            max_positions: self.max_positions,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub grid: Option<Vec<Tau>>,
    pub seeds: u64,
    pub master_seed: u64,
    pub train_fraction: f64,
    pub parallelism: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            grid: None,
            seeds: 1,
            master_seed: 0,
            train_fraction: 0.7,
            parallelism: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// When false, `wall_time_ms` in runs.csv is written as 0 so reruns are
    /// byte-identical; measured times always go to timings.csv.
    pub record_wall_time: bool,
    pub plots: bool,
    pub emit_loss: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("results"),
            record_wall_time: false,
            plots: false,
            emit_loss: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub datasets: DatasetsSection,
    pub models: ModelsSection,
    pub sweep: SweepSection,
    pub training: TrainConfig,
    pub output: OutputSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a manifest and resolves its relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.output.dir = base.join(&cfg.output.dir);
        for p in cfg.datasets.files.values_mut() {
            *p = base.join(&*p);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.names.is_empty() {
            return Err(Error::config("[datasets] names is empty"));
        }
        if self.models.archs.is_empty() {
            return Err(Error::config("[models] archs is empty"));
        }
        let mut names = self.datasets.names.clone();
        names.sort();
        names.dedup();
        if names.len() != self.datasets.names.len() {
            return Err(Error::config("a dataset is listed twice"));
        }
        let mut archs = self.models.archs.clone();
        archs.sort();
        archs.dedup();
        if archs.len() != self.models.archs.len() {
            return Err(Error::config("an arch is listed twice"));
        }
        if self.sweep.seeds == 0 {
            return Err(Error::config("[sweep] seeds must be at least 1"));
        }
        if !(self.sweep.train_fraction > 0.0 && self.sweep.train_fraction < 1.0) {
            return Err(Error::config("[sweep] train_fraction must lie in (0, 1)"));
        }
        if self.training.epochs == 0 || !(self.training.lr.is_finite() && self.training.lr >= 0.0) {
            return Err(Error::config(
                "[training] needs epochs >= 1 and a finite lr >= 0",
            ));
        }
        if self.training.negatives_per_positive == 0 {
            return Err(Error::config(
                "[training] negatives_per_positive must be at least 1",
            ));
        }
        for (name, &m) in &self.datasets.max_nodes {
            if m < 2 {
                return Err(Error::config(format!(
                    "max_nodes for {name} must be at least 2"
                )));
            }
        }
        self.models.hyper().validate()
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            master_seed: self.sweep.master_seed,
            train_fraction: self.sweep.train_fraction,
            hyper: self.models.hyper(),
            train: self.training,
        }
    }
}
