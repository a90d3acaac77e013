//! Locating and preparing the graphs a run refers to.

use std::env;
use std::path::{Path, PathBuf};

use crate::dtdg::{Dtdg, Snapshot};
use crate::error::{Error, Result};
use crate::ingest::{lookup, read_cache};
use crate::synthetic::{period_two, PeriodTwo, PERIOD_TWO_NAME};

/// Environment variable naming the directory of cached datasets.
pub const DATA_DIR_VAR: &str = "TEMPOFIELD_DATA_DIR";

/// A graph ready for experiments, with a note when it was altered.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub dtdg: Dtdg,
    pub note: Option<String>,
}

/// Cache file name of a dataset: its registry spelling, or the name as given.
pub fn cache_file_name(name: &str) -> String {
    format!("{}.json", lookup(name).map_or(name, |s| s.name))
}

pub fn data_dir() -> Option<PathBuf> {
    env::var_os(DATA_DIR_VAR)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}

/// Resolves `name` to a graph: the built-in synthetic graph, an explicit
/// cache path, or `$TEMPOFIELD_DATA_DIR/<name>.json`.
pub fn resolve(name: &str, explicit: Option<&Path>, data_dir: Option<&Path>) -> Result<Dtdg> {
    if let Some(path) = explicit {
        let (d, _) = read_cache(path).map_err(|e| missing(name, path, e))?;
        return Ok(d.with_name(name));
    }
    if name == PERIOD_TWO_NAME {
        return period_two(&PeriodTwo::default());
    }
    let dir = data_dir.ok_or_else(|| {
        Error::config(format!(
            "dataset {name} has no explicit file and {DATA_DIR_VAR} is not set"
        ))
    })?;
    let path = dir.join(cache_file_name(name));
    let (d, _) = read_cache(&path).map_err(|e| missing(name, &path, e))?;
    Ok(d.with_name(name))
}

fn missing(name: &str, path: &Path, e: Error) -> Error {
    match e {
        Error::Io(io) => Error::config(format!(
            "dataset {name}: cannot read {}: {io}",
            path.display()
        )),
        other => other,
    }
}

/// Resolves a dataset and applies the optional node cap.
pub fn load(
    name: &str,
    explicit: Option<&Path>,
    data_dir: Option<&Path>,
    max_nodes: Option<usize>,
) -> Result<LoadedDataset> {
    let dtdg = resolve(name, explicit, data_dir)?;
    match max_nodes {
        Some(cap) if cap < dtdg.num_nodes() => {
            let original = dtdg.num_nodes();
            let dtdg = keep_highest_degree(&dtdg, cap)?;
            let note =
                format!("SUBSAMPLED: {name} keeps its {cap} highest-degree nodes of {original}");
            Ok(LoadedDataset {
                dtdg,
                note: Some(note),
            })
        }
        _ => Ok(LoadedDataset { dtdg, note: None }),
    }
}

/// Restricts the graph to the `cap` nodes with the largest total degree over
/// all snapshots (ties to the smaller id), relabelled in id order.
pub fn keep_highest_degree(d: &Dtdg, cap: usize) -> Result<Dtdg> {
    let n = d.num_nodes();
    if cap >= n {
        return Ok(d.clone());
    }
    let mut degree = vec![0usize; n];
    for s in d.snapshots() {
        for &(u, v) in s.edges() {
            degree[u] += 1;
            degree[v] += 1;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| degree[b].cmp(&degree[a]).then(a.cmp(&b)));
    let mut kept = order[..cap].to_vec();
    kept.sort_unstable();
    let mut new_id = vec![usize::MAX; n];
    for (i, &old) in kept.iter().enumerate() {
        new_id[old] = i;
    }
    let snapshots = d
        .snapshots()
        .iter()
        .map(|s| {
            let keep =
                |&(u, v): &(usize, usize)| new_id[u] != usize::MAX && new_id[v] != usize::MAX;
            match s.weights() {
                Some(w) => {
                    let raw: Vec<_> = s
                        .edges()
                        .iter()
                        .filter(|e| keep(e))
                        .map(|e| (new_id[e.0], new_id[e.1], w.get(e).copied().unwrap_or(1.0)))
                        .collect();
                    Snapshot::from_weighted_edges(s.t(), &raw, cap)
                }
                None => {
                    let raw: Vec<_> = s
                        .edges()
                        .iter()
                        .filter(|e| keep(e))
                        .map(|e| (new_id[e.0], new_id[e.1]))
                        .collect();
                    Snapshot::from_edges(s.t(), &raw, cap)
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Dtdg::new(d.name(), cap, snapshots)
}
