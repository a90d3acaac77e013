//! Resumable sweep execution.
//!
//! Each finished `(dataset, arch, tau, seed)` unit is stored as its own
//! fragment under `units/`, written atomically. A rerun skips every unit
//! whose fragment exists and rebuilds the aggregate tables from the
//! fragments in configuration order, so the tables never depend on
//! scheduling or on where an earlier run was interrupted.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::datasets::{self, LoadedDataset};
use super::plot::render_curve_svg;
use super::records::*;
use crate::dtdg::Tau;
use crate::error::{Error, Result};
use crate::eval::{run_experiment, ExperimentConfig};
use crate::models::{Arch, Hyper};
use crate::sweep::{analyze, sweep_tau, validate_grid, SweepResult};

/// Settings that change a unit's outcome. Results from a different lock in
/// the same directory are never mixed in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunLock {
    master_seed: u64,
    train_fraction: f64,
    hyper: Hyper,
    epochs: usize,
    lr: f64,
    negatives_per_positive: usize,
    max_nodes: std::collections::BTreeMap<String, usize>,
}

impl RunLock {
    fn of(cfg: &RunConfig) -> Self {
        Self {
            master_seed: cfg.sweep.master_seed,
            train_fraction: cfg.sweep.train_fraction,
            hyper: cfg.models.hyper(),
            epochs: cfg.training.epochs,
            lr: cfg.training.lr,
            negatives_per_positive: cfg.training.negatives_per_positive,
            max_nodes: cfg.datasets.max_nodes.clone(),
        }
    }
}

const LOCK_FILE: &str = "run.lock.json";

fn check_lock(out: &Path, cfg: &RunConfig) -> Result<()> {
    let path = out.join(LOCK_FILE);
    let lock = RunLock::of(cfg);
    match fs::read_to_string(&path) {
        Ok(text) => {
            let found: RunLock = serde_json::from_str(&text).map_err(|e| Error::Format {
                path: path.clone(),
                message: e.to_string(),
            })?;
            if found != lock {
                return Err(Error::config(format!(
                    "{} holds results of a different configuration (seed, split, model or training settings)",
                    out.display()
                )));
            }
            Ok(())
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            write_atomic(&path, &(serde_json::to_string_pretty(&lock)? + "\n"))
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Unit {
    dataset: usize,
    arch: Arch,
    tau: Tau,
    seed: u64,
}

fn unit_stem(dataset: &str, u: &Unit) -> String {
    format!(
        "{}__{}__tau-{}__seed-{}",
        slug(dataset),
        u.arch,
        u.tau,
        u.seed
    )
}

/// What a sweep produced.
#[derive(Debug, Clone)]
pub struct SweepRun {
    pub out_dir: PathBuf,
    pub units_total: usize,
    pub units_run: usize,
    pub units_resumed: usize,
    pub failures: Vec<ErrorRow>,
    pub sweeps: Vec<SweepResult>,
    pub notes: Vec<String>,
}

impl SweepRun {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            super::EXIT_OK
        } else {
            super::EXIT_PARTIAL
        }
    }
}

/// Runs every missing unit of `cfg` and rewrites the aggregate tables.
/// Errors are configuration problems; failed units are reported in the
/// returned value and in errors.csv.
pub fn run_sweep(cfg: &RunConfig) -> Result<SweepRun> {
    cfg.validate()?;
    let out = cfg.output.dir.clone();
    let data_dir = datasets::data_dir();
    let loaded: Vec<LoadedDataset> = cfg
        .datasets
        .names
        .iter()
        .map(|name| {
            datasets::load(
                name,
                cfg.datasets.files.get(name).map(PathBuf::as_path),
                data_dir.as_deref(),
                cfg.datasets.max_nodes.get(name).copied(),
            )
        })
        .collect::<Result<_>>()?;
    let grids: Vec<Vec<Tau>> = loaded
        .iter()
        .map(|d| match &cfg.sweep.grid {
            Some(g) => validate_grid(g, d.dtdg.len()),
            None => Ok(crate::sweep::default_grid(d.dtdg.len())),
        })
        .collect::<Result<_>>()?;

    fs::create_dir_all(out.join("units"))?;
    check_lock(&out, cfg)?;
    let notes: Vec<String> = loaded.iter().filter_map(|d| d.note.clone()).collect();
    for n in &notes {
        eprintln!("warning: {n}");
    }

    let mut units = Vec::new();
    for (di, grid) in grids.iter().enumerate() {
        for &arch in &cfg.models.archs {
            for &tau in grid {
                for seed in 0..cfg.sweep.seeds {
                    units.push(Unit {
                        dataset: di,
                        arch,
                        tau,
                        seed,
                    });
                }
            }
        }
    }
    let fragment = |u: &Unit| {
        out.join("units")
            .join(unit_stem(&cfg.datasets.names[u.dataset], u) + ".csv")
    };
    let pending: Vec<Unit> = units
        .iter()
        .copied()
        .filter(|u| !fragment(u).exists())
        .collect();
    let resumed = units.len() - pending.len();

    let exp = cfg.experiment();
    let writer = Mutex::new(
        OpenOptions::new()
            .create(true)
            .append(true)
            .open(out.join("timings.csv"))?,
    );
    {
        let mut w = writer.lock().expect("writer lock");
        if w.metadata()?.len() == 0 {
            w.write_all(to_csv_string::<TimingRow>(TIMINGS_HEADER, &[])?.as_bytes())?;
        }
    }
    let work = || -> Vec<Option<ErrorRow>> {
        pending
            .par_iter()
            .map(|u| {
                let d = &loaded[u.dataset];
                match run_unit(&d.dtdg, u, &exp, cfg.output.record_wall_time) {
                    Ok((rows, curve, ms)) => {
                        let mut w = writer.lock().expect("writer lock");
                        let saved = (|| -> Result<()> {
                            if cfg.output.emit_loss && !curve.is_empty() {
                                let stem = unit_stem(d.dtdg.name(), u);
                                write_table(
                                    &out.join("loss").join(stem + ".csv"),
                                    LOSS_HEADER,
                                    &curve,
                                )?;
                            }
                            write_table(&fragment(u), RUNS_HEADER, &rows)?;
                            let t = TimingRow {
                                dataset: d.dtdg.name().to_string(),
                                arch: u.arch,
                                tau: u.tau,
                                seed: u.seed,
                                wall_time_ms: ms,
                            };
                            let line = to_csv_string(TIMINGS_HEADER, &[t])?;
                            w.write_all(line.split_once('\n').expect("header line").1.as_bytes())?;
                            Ok(())
                        })();
                        saved.err().map(|e| error_row(d, u, &e))
                    }
                    Err(e) => Some(error_row(d, u, &e)),
                }
            })
            .collect()
    };
    let outcomes = if cfg.sweep.parallelism > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.sweep.parallelism)
            .build()
            .map_err(|e| {
                Error::config(format!(
                    "cannot start {} workers: {e}",
                    cfg.sweep.parallelism
                ))
            })?
            .install(work)
    } else {
        work()
    };
    let failures: Vec<ErrorRow> = outcomes.into_iter().flatten().collect();
    write_table(&out.join("errors.csv"), ERRORS_HEADER, &failures)?;

    // Aggregate from fragments, in configuration order.
    let mut runs = Vec::new();
    let mut sweep_rows = Vec::new();
    let mut summary = Vec::new();
    let mut sweeps = Vec::new();
    for (di, d) in loaded.iter().enumerate() {
        let name = &cfg.datasets.names[di];
        for &arch in &cfg.models.archs {
            let cell: Vec<&Unit> = units
                .iter()
                .filter(|u| u.dataset == di && u.arch == arch)
                .collect();
            let mut means = Vec::with_capacity(cell.len());
            for u in &cell {
                let path = fragment(u);
                if !path.exists() {
                    continue;
                }
                let rows: Vec<RunRow> = read_table(&path, RUNS_HEADER)?;
                let mean = rows
                    .iter()
                    .find(|r| r.is_mean())
                    .and_then(RunRow::ap_value)
                    .ok_or_else(|| Error::Format {
                        path: path.clone(),
                        message: "no mean row".into(),
                    })?;
                means.push(((u.tau, u.seed), mean));
                runs.extend(rows);
            }
            if means.len() != cell.len() {
                continue;
            }
            let result = sweep_tau(
                name,
                arch,
                &grids[di],
                d.dtdg.len(),
                cfg.sweep.seeds,
                |tau, seed| {
                    Ok(means
                        .iter()
                        .find(|m| m.0 == (tau, seed))
                        .expect("every unit has a mean")
                        .1)
                },
            )?;
            let curve: Vec<CurveRow> = result
                .rows
                .iter()
                .map(|r| CurveRow {
                    tau: r.tau,
                    mean_ap: r.mean_ap,
                    std_ap: r.std_ap,
                })
                .collect();
            let stem = format!("{}__{}", slug(name), arch);
            write_table(
                &out.join("curves").join(format!("{stem}.csv")),
                CURVE_HEADER,
                &curve,
            )?;
            if cfg.output.plots {
                let title = format!("{name} {}", arch.label());
                write_atomic(
                    &out.join("plots").join(format!("{stem}.svg")),
                    &render_curve_svg(&title, &curve),
                )?;
            }
            sweep_rows.extend(result.rows.iter().map(|r| SweepCsvRow {
                dataset: name.clone(),
                arch,
                tau: r.tau,
                mean_ap: r.mean_ap,
                std_ap: r.std_ap,
                seeds: r.seeds,
            }));
            summary.push(SummaryRow {
                dataset: name.clone(),
                arch,
                snapshots: d.dtdg.len(),
                tau_star: result.tau_star.0,
                ap_tau_star: result.tau_star.1,
                ap_inf: result.ap_inf,
                ap_1: result.ap_1,
                gain: result.gain(),
                argmax_ties: ties_to_string(&result.argmax_ties),
                note: d.note.clone().unwrap_or_default(),
            });
            sweeps.push(result);
        }
    }
    write_table(&out.join("runs.csv"), RUNS_HEADER, &runs)?;
    write_table(&out.join("sweeps.csv"), SWEEPS_HEADER, &sweep_rows)?;
    write_table(&out.join("summary.csv"), SUMMARY_HEADER, &summary)?;
    let counts = |name: &str| {
        cfg.datasets
            .names
            .iter()
            .position(|n| n == name)
            .map(|i| loaded[i].dtdg.len())
    };
    let analysis: Vec<AnalysisRow> = analyze(&sweeps, counts)?
        .into_iter()
        .map(|a| AnalysisRow {
            arch: a.arch,
            datasets: a.datasets,
            avg_gain: a.avg_gain,
            correlation: a.correlation,
            note: a.note.unwrap_or_default(),
        })
        .collect();
    write_table(&out.join("analysis.csv"), ANALYSIS_HEADER, &analysis)?;

    Ok(SweepRun {
        out_dir: out,
        units_total: units.len(),
        units_run: pending.len(),
        units_resumed: resumed,
        failures,
        sweeps,
        notes,
    })
}

fn error_row(d: &LoadedDataset, u: &Unit, e: &Error) -> ErrorRow {
    ErrorRow {
        dataset: d.dtdg.name().to_string(),
        arch: u.arch,
        tau: u.tau,
        seed: u.seed,
        error: e.to_string(),
    }
}

fn run_unit(
    dtdg: &crate::dtdg::Dtdg,
    u: &Unit,
    exp: &ExperimentConfig,
    record_wall_time: bool,
) -> Result<(Vec<RunRow>, Vec<LossRow>, u64)> {
    let started = Instant::now();
    let outcome = run_experiment(dtdg, u.arch, u.tau, u.seed, exp)?;
    let ms = started.elapsed().as_millis() as u64;
    let rows = RunRow::from_eval(&outcome.eval, if record_wall_time { ms } else { 0 });
    let curve = outcome
        .loss_curve
        .iter()
        .enumerate()
        .map(|(epoch, &loss)| LossRow { epoch, loss })
        .collect();
    Ok((rows, curve, ms))
}
