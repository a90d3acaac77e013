//! The model zoo: four parametric window encoders, a shared pair decoder and
//! the EdgeBank memory baseline.
//!
//! Every encoder is a pure function of the parameters and the snapshots in
//! the window. Nothing is carried between predictions: recurrent state (LSTM
//! `h`/`c`, evolving GCN weights) starts fresh at the oldest snapshot of each
//! window, so `tau` is the true receptive field.

mod checkpoint;
mod decoder;
mod dysat;
mod edgebank;
mod egcn;
mod gclstm;
pub mod layers;
mod stgcn;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dtdg::{canonical, Edge, TemporalWindow};
use crate::error::{Error, Result};
use crate::tensor::{ParamId, ParamSet, Tape, Tensor, TensorError, Var};

pub use checkpoint::{
    load_checkpoint, read_checkpoint_str, save_checkpoint, write_checkpoint_string,
    CHECKPOINT_FORMAT,
};
pub use decoder::decode_edge;
pub use dysat::temporal_attention_weights;
pub use edgebank::edgebank_score;
pub use egcn::evolve_weights;
pub use layers::{gcn_layer, temporal_conv};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arch {
    Egcn,
    Dysat,
    Gclstm,
    Stgcn,
    EdgeBank,
}

impl Arch {
    pub const ALL: [Arch; 5] = [
        Arch::Egcn,
        Arch::Dysat,
        Arch::Gclstm,
        Arch::Stgcn,
        Arch::EdgeBank,
    ];
    pub const PARAMETRIC: [Arch; 4] = [Arch::Egcn, Arch::Dysat, Arch::Gclstm, Arch::Stgcn];

    pub fn name(self) -> &'static str {
        match self {
            Arch::Egcn => "egcn",
            Arch::Dysat => "dysat",
            Arch::Gclstm => "gclstm",
            Arch::Stgcn => "stgcn",
            Arch::EdgeBank => "edgebank",
        }
    }

    /// Column label used in rendered tables.
    pub fn label(self) -> &'static str {
        match self {
            Arch::Egcn => "EGCN",
            Arch::Dysat => "DySAT",
            Arch::Gclstm => "GCLSTM",
            Arch::Stgcn => "STGCN",
            Arch::EdgeBank => "EdgeBank",
        }
    }

    pub fn is_parametric(self) -> bool {
        self != Arch::EdgeBank
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Arch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(char::is_ascii_alphanumeric)
            .map(|c| c.to_ascii_lowercase())
            .collect();
        Arch::ALL
            .into_iter()
            .find(|a| a.name() == key)
            .ok_or_else(|| Error::config(format!("unknown architecture {s:?}")))
    }
}

/// Model size hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hyper {
    /// Width of the learned node embedding table.
    pub d_in: usize,
    /// Width of the node representations `Z`.
    pub hidden: usize,
    pub layers: usize,
    pub heads: usize,
    pub kernel: usize,
    /// Rows of the DySAT position table; windows longer than this are rejected.
    pub max_positions: usize,
}

impl Default for Hyper {
    fn default() -> Self {
        Self {
            d_in: 32,
            hidden: 64,
            layers: 1,
            heads: 4,
            kernel: 3,
            max_positions: 136,
        }
    }
}

impl Hyper {
    pub fn validate(&self) -> Result<()> {
        if self.d_in == 0 || self.hidden == 0 || self.kernel == 0 || self.max_positions == 0 {
            return Err(Error::config("model sizes must be positive"));
        }
        if self.layers != 1 {
            return Err(Error::config("only single-layer encoders are supported"));
        }
        if self.heads == 0 || !self.hidden.is_multiple_of(self.heads) {
            return Err(Error::config(format!(
                "hidden size {} is not divisible by {} heads",
                self.hidden, self.heads
            )));
        }
        Ok(())
    }
}

/// Architecture tag, sizes and trained parameters.
#[derive(Debug, Clone)]
pub struct ModelState {
    arch: Arch,
    num_nodes: usize,
    hyper: Hyper,
    params: ParamSet,
}

/// Parameters bound onto one tape, in registration order.
pub struct Bound<'p> {
    params: &'p ParamSet,
    vars: Vec<Var>,
}

impl Bound<'_> {
    pub fn get(&self, name: &str) -> std::result::Result<Var, TensorError> {
        Ok(self.vars[self.params.id(name)?.index()])
    }

    /// Routes parameter `id` through `var` instead, e.g. a leaf under a
    /// gradient check.
    pub fn replace(&mut self, id: ParamId, var: Var) {
        self.vars[id.index()] = var;
    }
}

impl ModelState {
    pub fn new<R: Rng + ?Sized>(
        arch: Arch,
        num_nodes: usize,
        hyper: Hyper,
        rng: &mut R,
    ) -> Result<Self> {
        hyper.validate()?;
        if num_nodes < 2 {
            return Err(Error::config("a model needs at least two nodes"));
        }
        let mut params = ParamSet::new();
        if arch.is_parametric() {
            params.register("embed", Tensor::glorot(num_nodes, hyper.d_in, rng))?;
            match arch {
                Arch::Egcn => egcn::register(&mut params, &hyper, rng)?,
                Arch::Dysat => dysat::register(&mut params, &hyper, rng)?,
                Arch::Gclstm => gclstm::register(&mut params, &hyper, rng)?,
                Arch::Stgcn => stgcn::register(&mut params, &hyper, rng)?,
                Arch::EdgeBank => unreachable!(),
            }
            decoder::register(&mut params, hyper.hidden, rng)?;
        }
        Ok(Self {
            arch,
            num_nodes,
            hyper,
            params,
        })
    }

    pub(crate) fn from_parts(arch: Arch, num_nodes: usize, hyper: Hyper, params: ParamSet) -> Self {
        Self {
            arch,
            num_nodes,
            hyper,
            params,
        }
    }

    pub fn arch(&self) -> Arch {
        self.arch
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn hyper(&self) -> &Hyper {
        &self.hyper
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    pub fn bind<'p>(&'p self, tape: &mut Tape) -> Bound<'p> {
        let vars = self
            .params
            .ids()
            .map(|id| tape.param(&self.params, id))
            .collect();
        Bound {
            params: &self.params,
            vars,
        }
    }

    fn check_window(&self, window: &TemporalWindow<'_>) -> Result<()> {
        if window.is_empty() {
            return Err(Error::protocol("empty temporal window"));
        }
        if let Some(&max) = window
            .snapshots
            .iter()
            .filter_map(|s| s.active_nodes().iter().next_back())
            .max()
        {
            if max >= self.num_nodes {
                return Err(Error::NodeOutOfRange {
                    id: max,
                    num_nodes: self.num_nodes,
                });
            }
        }
        Ok(())
    }

    /// Records the encoder on `tape`; the result is `num_nodes × hidden`.
    pub fn encode(
        &self,
        tape: &mut Tape,
        bound: &Bound<'_>,
        window: &TemporalWindow<'_>,
    ) -> Result<Var> {
        self.check_window(window)?;
        let n = self.num_nodes;
        let z = match self.arch {
            Arch::Egcn => egcn::encode(tape, bound, window, n)?,
            Arch::Dysat => dysat::encode(tape, bound, window, n, &self.hyper)?.0,
            Arch::Gclstm => gclstm::encode(tape, bound, window, n, &self.hyper)?,
            Arch::Stgcn => stgcn::encode(tape, bound, window, n, &self.hyper)?,
            Arch::EdgeBank => {
                return Err(Error::protocol("EdgeBank has no node representations"));
            }
        };
        Ok(z)
    }

    /// Decoder logits for canonicalized pairs, as a `pairs × 1` column.
    pub fn logits(
        &self,
        tape: &mut Tape,
        bound: &Bound<'_>,
        z: Var,
        pairs: &[Edge],
    ) -> Result<Var> {
        Ok(decoder::logits(tape, bound, z, pairs)?)
    }

    /// Node representations for a window, outside of any training graph.
    pub fn embeddings(&self, window: &TemporalWindow<'_>) -> Result<Tensor> {
        let mut tape = Tape::new();
        let bound = self.bind(&mut tape);
        let z = self.encode(&mut tape, &bound, window)?;
        Ok(tape.value(z).clone())
    }

    /// Edge probabilities for each pair. EdgeBank returns hard 0/1 scores.
    pub fn score_pairs(&self, window: &TemporalWindow<'_>, pairs: &[Edge]) -> Result<Vec<f64>> {
        self.check_window(window)?;
        for &(u, v) in pairs {
            for id in [u, v] {
                if id >= self.num_nodes {
                    return Err(Error::NodeOutOfRange {
                        id,
                        num_nodes: self.num_nodes,
                    });
                }
            }
        }
        if self.arch == Arch::EdgeBank {
            let memory = edgebank::Memory::from_window(window);
            return Ok(pairs
                .iter()
                .map(|&(u, v)| if memory.contains(u, v) { 1.0 } else { 0.0 })
                .collect());
        }
        let mut tape = Tape::new();
        let bound = self.bind(&mut tape);
        let z = self.encode(&mut tape, &bound, window)?;
        let canon: Vec<Edge> = pairs.iter().map(|&(u, v)| canonical(u, v)).collect();
        let logits = decoder::logits(&mut tape, &bound, z, &canon)?;
        Ok(tape
            .value(logits)
            .data()
            .iter()
            .map(|&x| crate::tensor::sigmoid(x))
            .collect())
    }
}

/// Dense normalized adjacency of every snapshot in the window, as tape constants.
pub(crate) fn window_adjacency(tape: &mut Tape, window: &TemporalWindow<'_>, n: usize) -> Vec<Var> {
    window
        .snapshots
        .iter()
        .map(|s| tape.constant(s.normalized_adjacency(n)))
        .collect()
}

#[cfg(test)]
mod tests;
