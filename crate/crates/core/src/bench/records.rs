//! Result files and their closed CSV schemas.
//!
//! | file | columns |
//! |------|---------|
//! | `runs.csv` | `dataset,arch,tau,seed,step,ap,wall_time_ms` |
//! | `sweeps.csv` | `dataset,arch,tau,mean_ap,std_ap,seeds` |
//! | `summary.csv` | `dataset,arch,snapshots,tau_star,ap_tau_star,ap_inf,ap_1,gain,argmax_ties,note` |
//! | `analysis.csv` | `arch,datasets,avg_gain,correlation,note` |
//! | `curves/<dataset>__<arch>.csv` | `tau,mean_ap,std_ap` |
//! | `errors.csv` | `dataset,arch,tau,seed,error` |
//! | `timings.csv` | `dataset,arch,tau,seed,wall_time_ms` |
//! | loss curves | `epoch,loss` |
//!
//! `tau` is an integer or `inf`. APs are fractions in `[0, 1]`; `avg_gain`
//! is in AP×100 points. In runs.csv every unit contributes one row per test
//! step (`ap` is `skip` for an empty target) followed by a row with `step`
//! set to `mean`. `argmax_ties` joins taus with `;`. Reading a file whose
//! header differs from its schema in any way is an error.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dtdg::Tau;
use crate::error::{Error, Result};
use crate::eval::{EvalResult, StepOutcome};
use crate::models::Arch;

pub const RUNS_HEADER: &[&str] = &[
    "dataset",
    "arch",
    "tau",
    "seed",
    "step",
    "ap",
    "wall_time_ms",
];
pub const SWEEPS_HEADER: &[&str] = &["dataset", "arch", "tau", "mean_ap", "std_ap", "seeds"];
pub const SUMMARY_HEADER: &[&str] = &[
    "dataset",
    "arch",
    "snapshots",
    "tau_star",
    "ap_tau_star",
    "ap_inf",
    "ap_1",
    "gain",
    "argmax_ties",
    "note",
];
pub const ANALYSIS_HEADER: &[&str] = &["arch", "datasets", "avg_gain", "correlation", "note"];
pub const CURVE_HEADER: &[&str] = &["tau", "mean_ap", "std_ap"];
pub const ERRORS_HEADER: &[&str] = &["dataset", "arch", "tau", "seed", "error"];
pub const TIMINGS_HEADER: &[&str] = &["dataset", "arch", "tau", "seed", "wall_time_ms"];
pub const LOSS_HEADER: &[&str] = &["epoch", "loss"];

pub const MEAN_STEP: &str = "mean";
pub const SKIP_AP: &str = "skip";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub dataset: String,
    pub arch: Arch,
    pub tau: Tau,
    pub seed: u64,
    pub step: String,
    pub ap: String,
    pub wall_time_ms: u64,
}

impl RunRow {
    /// Step rows followed by the summary row of one evaluated unit.
    pub fn from_eval(e: &EvalResult, wall_time_ms: u64) -> Vec<RunRow> {
        let row = |step: String, ap: String, wall_time_ms| RunRow {
            dataset: e.dataset.clone(),
            arch: e.arch,
            tau: e.tau,
            seed: e.seed,
            step,
            ap,
            wall_time_ms,
        };
        let mut rows: Vec<RunRow> = e
            .per_step
            .iter()
            .map(|s| match s {
                StepOutcome::Scored { t, ap } => row(t.to_string(), format_f64(*ap), 0),
                StepOutcome::Skipped { t } => row(t.to_string(), SKIP_AP.into(), 0),
            })
            .collect();
        rows.push(row(MEAN_STEP.into(), format_f64(e.mean_ap), wall_time_ms));
        rows
    }

    pub fn is_mean(&self) -> bool {
        self.step == MEAN_STEP
    }

    pub fn ap_value(&self) -> Option<f64> {
        self.ap.parse().ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCsvRow {
    pub dataset: String,
    pub arch: Arch,
    pub tau: Tau,
    pub mean_ap: f64,
    pub std_ap: f64,
    pub seeds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub dataset: String,
    pub arch: Arch,
    pub snapshots: usize,
    pub tau_star: Tau,
    pub ap_tau_star: f64,
    pub ap_inf: f64,
    pub ap_1: f64,
    pub gain: f64,
    pub argmax_ties: String,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRow {
    pub arch: Arch,
    pub datasets: usize,
    pub avg_gain: f64,
    /// Empty when the correlation is undefined.
    pub correlation: Option<f64>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub tau: Tau,
    pub mean_ap: f64,
    pub std_ap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub dataset: String,
    pub arch: Arch,
    pub tau: Tau,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub dataset: String,
    pub arch: Arch,
    pub tau: Tau,
    pub seed: u64,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossRow {
    pub epoch: usize,
    pub loss: f64,
}

/// Shortest text that parses back to the same `f64`.
pub fn format_f64(x: f64) -> String {
    let mut s = format!("{x}");
    if x.is_finite() && !s.contains(['.', 'e', 'E']) {
        s.push_str(".0");
    }
    s
}

pub fn ties_to_string(ties: &[Tau]) -> String {
    ties.iter()
        .map(Tau::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

pub fn parse_ties(s: &str) -> Result<Vec<Tau>> {
    s.split(';')
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect()
}

/// Serializes rows under an explicit header, so empty tables keep it.
pub fn to_csv_string<T: Serialize>(header: &[&str], rows: &[T]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Writes through a temporary file and a rename, so readers never see a
/// partial table.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    {
        let mut f = fs::File::create(tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(tmp, path)?;
    Ok(())
}

pub fn write_table<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    write_atomic(path, &to_csv_string(header, rows)?)
}

pub fn parse_table<T: DeserializeOwned>(
    text: &str,
    header: &[&str],
    origin: &Path,
) -> Result<Vec<T>> {
    let bad = |message: String| Error::Format {
        path: origin.to_path_buf(),
        message,
    };
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let found = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    if let Some(extra) = found.iter().find(|c| !header.contains(c)) {
        return Err(bad(format!("unknown column {extra:?}")));
    }
    if found.iter().ne(header.iter().copied()) {
        return Err(bad(format!("expected columns {}", header.join(","))));
    }
    r.deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| bad(format!("row {}: {e}", i + 1))))
        .collect()
}

pub fn read_table<T: DeserializeOwned>(path: &Path, header: &[&str]) -> Result<Vec<T>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
    parse_table(&text, header, path)
}

/// File-name-safe form of a dataset or arch name.
pub fn slug(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}
