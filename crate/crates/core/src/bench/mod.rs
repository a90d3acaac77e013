//! Experiment orchestration behind the command-line front end: run
//! manifests, dataset resolution, resumable sweeps, result tables and
//! reports.

pub mod config;
pub mod datasets;
pub mod fixtures_check;
pub mod plot;
pub mod records;
pub mod report;
pub mod runner;

use std::fs;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::ingest::{
    discretize, lookup, parse_edge_list, validate_against_registry, write_cache, Discretization,
    Layout, ValidationReport,
};

pub use config::RunConfig;
pub use runner::{run_sweep, SweepRun};

pub const EXIT_OK: i32 = 0;
/// Configuration, parse or validation error.
pub const EXIT_CONFIG: i32 = 2;
/// At least one experiment unit failed.
pub const EXIT_PARTIAL: i32 = 3;

#[derive(Debug, Clone)]
pub struct IngestRequest {
    pub input: PathBuf,
    pub name: String,
    pub layout: Layout,
    /// Defaults to the registry rule of `name`.
    pub rule: Option<Discretization>,
    /// Defaults to `$TEMPOFIELD_DATA_DIR/<name>.json`.
    pub out: Option<PathBuf>,
    pub dry_run: bool,
    /// Write the cache even when the registry check fails.
    pub force: bool,
}

#[derive(Debug, Clone)]
pub struct IngestOutcome {
    /// `"<N> nodes, <L> links, <T> snapshots"`.
    pub stats: String,
    pub validation: Option<ValidationReport>,
    pub written: Option<PathBuf>,
}

impl IngestOutcome {
    pub fn passed(&self) -> bool {
        self.validation
            .as_ref()
            .is_none_or(ValidationReport::passed)
    }
}

/// Parses, discretizes and validates an edge list, then writes the cache
/// unless this is a dry run or validation failed without `force`.
pub fn ingest(req: &IngestRequest) -> Result<IngestOutcome> {
    let spec = lookup(&req.name);
    let rule = req.rule.or(spec.map(|s| s.rule)).ok_or_else(|| {
        Error::config(format!(
            "{} is not a registered dataset; give a discretization rule",
            req.name
        ))
    })?;
    let file = fs::File::open(&req.input)
        .map_err(|e| Error::config(format!("cannot read {}: {e}", req.input.display())))?;
    let events = parse_edge_list(std::io::BufReader::new(file), &req.layout)?;
    let name = spec.map_or(req.name.as_str(), |s| s.name);
    let d = discretize(name, &events, rule)?;
    let stats = format!(
        "{} nodes, {} links, {} snapshots",
        d.dtdg.num_nodes(),
        d.dtdg.total_links(),
        d.dtdg.len()
    );
    let validation = spec.map(|s| validate_against_registry(&d.dtdg, s));
    let mut outcome = IngestOutcome {
        stats,
        validation,
        written: None,
    };
    if req.dry_run || !(outcome.passed() || req.force) {
        return Ok(outcome);
    }
    let path = match &req.out {
        Some(p) => p.clone(),
        None => datasets::data_dir()
            .ok_or_else(|| Error::config(format!("give --out or set {}", datasets::DATA_DIR_VAR)))?
            .join(datasets::cache_file_name(name)),
    };
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_cache(&path, &d.dtdg, Some(&d.node_ids))?;
    outcome.written = Some(path);
    Ok(outcome)
}

/// Exit code of a failed command: input and configuration problems are 2,
/// failures while training or evaluating are 3.
pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::Parse { .. }
        | Error::Format { .. }
        | Error::Io(_)
        | Error::Json(_)
        | Error::Csv(_) => EXIT_CONFIG,
        _ => EXIT_PARTIAL,
    }
}
