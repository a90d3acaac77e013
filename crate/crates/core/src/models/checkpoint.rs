//! JSON checkpoint document.
//!
//! ```text
//! {
//!   "format": "tempofield-checkpoint",
//!   "version": 1,
//!   "arch": "egcn" | "dysat" | "gclstm" | "stgcn" | "edgebank",
//!   "num_nodes": <int>,
//!   "hyper": { "d_in", "hidden", "layers", "heads", "kernel", "max_positions" },
//!   "params": [ { "name": <string>, "shape": [rows, cols], "values": [row-major f64] } ]
//! }
//! ```
//!
//! Parameters appear in registration order. Loading rebuilds a fresh model of
//! the same arch and hyper block and requires the exact same name set and shapes.

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Arch, Hyper, ModelState};
use crate::error::{Error, Result};
use crate::tensor::{ParamSet, Tensor};

pub const CHECKPOINT_FORMAT: &str = "tempofield-checkpoint";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    format: String,
    version: u32,
    arch: Arch,
    num_nodes: usize,
    hyper: Hyper,
    params: Vec<ParamEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamEntry {
    name: String,
    shape: [usize; 2],
    values: Vec<f64>,
}

pub fn write_checkpoint_string(model: &ModelState) -> Result<String> {
    let doc = Document {
        format: CHECKPOINT_FORMAT.to_string(),
        version: VERSION,
        arch: model.arch(),
        num_nodes: model.num_nodes(),
        hyper: *model.hyper(),
        params: model
            .params()
            .iter()
            .map(|(name, t)| ParamEntry {
                name: name.to_string(),
                shape: [t.rows(), t.cols()],
                values: t.data().to_vec(),
            })
            .collect(),
    };
    Ok(serde_json::to_string(&doc)?)
}

pub fn read_checkpoint_str(text: &str, origin: &str) -> Result<ModelState> {
    let bad = |message: String| Error::Format {
        path: origin.into(),
        message,
    };
    let doc: Document = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    if doc.format != CHECKPOINT_FORMAT {
        return Err(bad(format!(
            "format tag {:?}, expected {CHECKPOINT_FORMAT:?}",
            doc.format
        )));
    }
    if doc.version != VERSION {
        return Err(bad(format!("unsupported version {}", doc.version)));
    }
    // The template fixes the expected names and shapes; its random values are discarded.
    let template = ModelState::new(
        doc.arch,
        doc.num_nodes,
        doc.hyper,
        &mut ChaCha8Rng::seed_from_u64(0),
    )?;
    if template.params().len() != doc.params.len() {
        return Err(bad(format!(
            "{} parameters, expected {}",
            doc.params.len(),
            template.params().len()
        )));
    }
    let mut params = ParamSet::new();
    for ((want_name, want), entry) in template.params().iter().zip(doc.params) {
        if entry.name != want_name {
            return Err(bad(format!(
                "parameter {:?} where {want_name:?} was expected",
                entry.name
            )));
        }
        if entry.shape != [want.rows(), want.cols()] {
            return Err(bad(format!(
                "parameter {want_name:?} has shape {:?}, expected {:?}",
                entry.shape,
                want.shape()
            )));
        }
        if entry.values.iter().any(|x| !x.is_finite()) {
            return Err(bad(format!(
                "parameter {want_name:?} holds non-finite values"
            )));
        }
        let value = Tensor::new(entry.shape[0], entry.shape[1], entry.values)
            .map_err(|e| bad(e.to_string()))?;
        params.register(&entry.name, value)?;
    }
    Ok(ModelState::from_parts(
        doc.arch,
        doc.num_nodes,
        doc.hyper,
        params,
    ))
}

pub fn save_checkpoint(model: &ModelState, path: &Path) -> Result<()> {
    let text = write_checkpoint_string(model)?;
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<ModelState> {
    let text = fs::read_to_string(path)?;
    read_checkpoint_str(&text, &path.display().to_string())
}
