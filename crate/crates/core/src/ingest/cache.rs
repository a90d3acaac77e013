//! Canonical dataset cache: a JSON document
//!
//! ```text
//! {
//!   "format": "tempofield-dtdg",
//!   "version": 1,
//!   "name": "<dataset name>",
//!   "num_nodes": N,
//!   "num_snapshots": T,
//!   "node_ids": ["<raw id of node 0>", ...],      // optional, length N
//!   "snapshots": [
//!     { "t": 0, "edges": [[u, v], ...], "weights": [w, ...] },   // weights optional
//!     ...
//!   ]
//! }
//! ```
//!
//! Edges are `u < v`, sorted ascending; `weights[i]` belongs to `edges[i]`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dtdg::{Dtdg, Snapshot};
use crate::error::{Error, Result};

pub const CACHE_FORMAT: &str = "tempofield-dtdg";
const CACHE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CacheDoc {
    format: String,
    version: u32,
    name: String,
    num_nodes: usize,
    num_snapshots: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    node_ids: Option<Vec<String>>,
    snapshots: Vec<CacheSnapshot>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CacheSnapshot {
    t: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
}

pub fn write_cache_string(d: &Dtdg, node_ids: Option<&[String]>) -> Result<String> {
    let doc = CacheDoc {
        format: CACHE_FORMAT.into(),
        version: CACHE_VERSION,
        name: d.name().into(),
        num_nodes: d.num_nodes(),
        num_snapshots: d.len(),
        node_ids: node_ids.map(<[String]>::to_vec),
        snapshots: d
            .snapshots()
            .iter()
            .map(|s| CacheSnapshot {
                t: s.t(),
                edges: s.edges().iter().map(|&(u, v)| [u, v]).collect(),
                weights: s.weights().map(|w| {
                    s.edges()
                        .iter()
                        .map(|e| w.get(e).copied().unwrap_or(1.0))
                        .collect()
                }),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc)?;
    out.push('\n');
    Ok(out)
}

pub fn write_cache(path: &Path, d: &Dtdg, node_ids: Option<&[String]>) -> Result<()> {
    let text = write_cache_string(d, node_ids)?;
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_cache_str(text: &str, origin: &Path) -> Result<(Dtdg, Option<Vec<String>>)> {
    let bad = |message: String| Error::Format {
        path: origin.to_path_buf(),
        message,
    };
    let doc: CacheDoc = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    if doc.format != CACHE_FORMAT || doc.version != CACHE_VERSION {
        return Err(bad(format!(
            "unsupported format {} v{}",
            doc.format, doc.version
        )));
    }
    if doc.snapshots.len() != doc.num_snapshots {
        return Err(bad(format!(
            "num_snapshots {} but {} snapshot records",
            doc.num_snapshots,
            doc.snapshots.len()
        )));
    }
    if let Some(ids) = &doc.node_ids {
        if ids.len() != doc.num_nodes {
            return Err(bad(format!(
                "{} node ids for {} nodes",
                ids.len(),
                doc.num_nodes
            )));
        }
    }
    let mut snapshots = Vec::with_capacity(doc.snapshots.len());
    for (i, s) in doc.snapshots.iter().enumerate() {
        if s.t != i {
            return Err(bad(format!("snapshot record {i} has t = {}", s.t)));
        }
        let snap = match &s.weights {
            Some(w) => {
                if w.len() != s.edges.len() {
                    return Err(bad(format!(
                        "snapshot {i}: weights and edges differ in length"
                    )));
                }
                let raw: Vec<_> = s
                    .edges
                    .iter()
                    .zip(w)
                    .map(|(e, &w)| (e[0], e[1], w))
                    .collect();
                Snapshot::from_weighted_edges(i, &raw, doc.num_nodes)?
            }
            None => {
                let raw: Vec<_> = s.edges.iter().map(|e| (e[0], e[1])).collect();
                Snapshot::from_edges(i, &raw, doc.num_nodes)?
            }
        };
        snapshots.push(snap);
    }
    Ok((Dtdg::new(doc.name, doc.num_nodes, snapshots)?, doc.node_ids))
}

pub fn read_cache(path: &Path) -> Result<(Dtdg, Option<Vec<String>>)> {
    read_cache_str(&fs::read_to_string(path)?, path)
}
