//! Training and rolling evaluation protocol.
//!
//! Every test step `t` predicts snapshot `t + 1` from the window ending at
//! `t`: the positives are the edges of `G^{t+1}`, matched one-for-one with
//! uniformly sampled non-edges, and the step's score is the average
//! precision of the model's ranking. The run's score is the plain mean over
//! steps.

mod metrics;
mod sampling;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dtdg::{chronological_split, Dtdg, Snapshot, SplitSpec, Tau, TemporalWindow};
use crate::error::{Error, Result};
use crate::models::{Arch, Hyper, ModelState};
use crate::tensor::{adam_step, OptimizerState, Tape};

pub use metrics::average_precision;
pub use sampling::{sample_negatives, LabeledEdgeSet};

/// Optimization budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub negatives_per_positive: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            lr: 1e-3,
            negatives_per_positive: 1,
        }
    }
}

/// Outcome of one prediction step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Scored {
        t: usize,
        ap: f64,
    },
    /// The target snapshot had no edges, so AP is undefined.
    Skipped {
        t: usize,
    },
}

impl StepOutcome {
    pub fn t(&self) -> usize {
        match *self {
            StepOutcome::Scored { t, .. } | StepOutcome::Skipped { t } => t,
        }
    }

    pub fn ap(&self) -> Option<f64> {
        match *self {
            StepOutcome::Scored { ap, .. } => Some(ap),
            StepOutcome::Skipped { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub dataset: String,
    pub arch: Arch,
    pub tau: Tau,
    pub seed: u64,
    pub per_step: Vec<StepOutcome>,
    pub mean_ap: f64,
    pub wall_time_ms: u64,
}

impl EvalResult {
    /// Equality of everything except timing.
    pub fn same_outcome(&self, other: &EvalResult) -> bool {
        self.dataset == other.dataset
            && self.arch == other.arch
            && self.tau == other.tau
            && self.seed == other.seed
            && self.per_step.len() == other.per_step.len()
            && self.per_step.iter().zip(&other.per_step).all(|(a, b)| {
                a.t() == b.t() && a.ap().map(f64::to_bits) == b.ap().map(f64::to_bits)
            })
            && self.mean_ap.to_bits() == other.mean_ap.to_bits()
    }
}

/// Seed for one `(dataset, arch, tau, seed_index)` unit, independent of
/// scheduling order.
pub fn derive_seed(master_seed: u64, dataset: &str, arch: Arch, tau: Tau, seed_index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(b"tempofield-unit\0");
    h.update(master_seed.to_le_bytes());
    h.update(dataset.as_bytes());
    h.update([0]);
    h.update(arch.name().as_bytes());
    h.update([0]);
    h.update(tau.to_string().as_bytes());
    h.update([0]);
    h.update(seed_index.to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Seed of a dataset's evaluation negatives. Every unit on the dataset is
/// scored against the same labeled sets, so units differing only in `tau`,
/// arch or seed index are compared on identical pairs.
pub fn eval_seed(master_seed: u64, dataset: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(b"tempofield-eval\0");
    h.update(master_seed.to_le_bytes());
    h.update(dataset.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Independent RNG substream of a unit seed.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const STREAM_INIT: u64 = 0;
const STREAM_TRAIN: u64 = 1;
/// Evaluation step `t` uses stream `STREAM_EVAL + t`.
const STREAM_EVAL: u64 = 2;

fn target_of<'a>(dtdg: &'a Dtdg, window: &TemporalWindow<'_>) -> Result<&'a Snapshot> {
    dtdg.snapshot(window.end + 1)
}

/// Scores the balanced pair set of `target` and returns its AP.
pub fn evaluate_step<R: Rng + ?Sized>(
    model: &ModelState,
    window: &TemporalWindow<'_>,
    target: &Snapshot,
    rng: &mut R,
) -> Result<StepOutcome> {
    let t = window.end;
    if target.t() != t + 1 {
        return Err(Error::protocol(format!(
            "target snapshot {} does not follow a window ending at {t}",
            target.t()
        )));
    }
    if target.num_edges() == 0 {
        return Ok(StepOutcome::Skipped { t });
    }
    let set = LabeledEdgeSet::build(t, target, model.num_nodes(), rng)?;
    debug_assert!(set.is_balanced());
    let (pairs, labels) = set.pairs_and_labels();
    let scores = model.score_pairs(window, &pairs)?;
    Ok(StepOutcome::Scored {
        t,
        ap: average_precision(&scores, &labels)?,
    })
}

/// Fits `model` on the training range. Returns the mean loss of each epoch;
/// EdgeBank has nothing to fit and returns an empty curve.
pub fn train<R: Rng + ?Sized>(
    model: &mut ModelState,
    dtdg: &Dtdg,
    tau: Tau,
    split: &SplitSpec,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !model.arch().is_parametric() {
        return Ok(Vec::new());
    }
    if model.num_nodes() != dtdg.num_nodes() {
        return Err(Error::protocol(format!(
            "model built for {} nodes, graph has {}",
            model.num_nodes(),
            dtdg.num_nodes()
        )));
    }
    if cfg.negatives_per_positive == 0 {
        return Err(Error::config("negatives_per_positive must be at least 1"));
    }
    let mut opt = OptimizerState::new(model.params(), cfg.lr);
    let mut curve = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let (mut total, mut steps) = (0.0, 0usize);
        for t in split.train_steps() {
            let window = dtdg.window(t, tau)?;
            let target = target_of(dtdg, &window)?;
            if target.num_edges() == 0 {
                continue;
            }
            let positives: Vec<_> = target.edges().iter().copied().collect();
            let count = positives.len() * cfg.negatives_per_positive;
            let negatives = sample_negatives(target, count, dtdg.num_nodes(), rng)?;
            let targets: Vec<f64> = positives
                .iter()
                .map(|_| 1.0)
                .chain(negatives.iter().map(|_| 0.0))
                .collect();
            let pairs: Vec<_> = positives.into_iter().chain(negatives).collect();

            let mut tape = Tape::new();
            let bound = model.bind(&mut tape);
            let z = model.encode(&mut tape, &bound, &window)?;
            let logits = model.logits(&mut tape, &bound, z, &pairs)?;
            let loss = tape.bce_with_logits(logits, &targets)?;
            let value = tape.value(loss).item();
            if !value.is_finite() {
                return Err(Error::Diverged { epoch, step: t });
            }
            let grads = tape.backward(loss)?;
            drop(bound);
            model.params_mut().accumulate(&grads);
            adam_step(model.params_mut(), &mut opt)?;
            total += value;
            steps += 1;
        }
        if steps == 0 {
            return Err(Error::protocol("every training target is empty"));
        }
        curve.push(total / steps as f64);
    }
    Ok(curve)
}

/// Evaluates every test step, each with its own RNG substream, and averages
/// the AP of the steps that were not skipped.
pub fn rolling_evaluate(
    model: &ModelState,
    dtdg: &Dtdg,
    tau: Tau,
    split: &SplitSpec,
    seed: u64,
) -> Result<EvalResult> {
    let started = Instant::now();
    let steps: Vec<usize> = split.test_steps().collect();
    let per_step = steps
        .par_iter()
        .map(|&t| {
            let window = dtdg.window(t, tau)?;
            let target = target_of(dtdg, &window)?;
            let mut rng = substream(seed, STREAM_EVAL + t as u64);
            evaluate_step(model, &window, target, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let scored: Vec<f64> = per_step.iter().filter_map(StepOutcome::ap).collect();
    if scored.is_empty() {
        return Err(Error::protocol(format!(
            "all {} test steps of {} have empty targets",
            per_step.len(),
            dtdg.name()
        )));
    }
    Ok(EvalResult {
        dataset: dtdg.name().to_string(),
        arch: model.arch(),
        tau,
        seed,
        mean_ap: scored.iter().sum::<f64>() / scored.len() as f64,
        per_step,
        wall_time_ms: started.elapsed().as_millis() as u64,
    })
}

/// Everything that fixes a unit's outcome besides the graph itself.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub train_fraction: f64,
    pub hyper: Hyper,
    pub train: TrainConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            train_fraction: 0.7,
            hyper: Hyper::default(),
            train: TrainConfig::default(),
        }
    }
}

/// A finished unit: the evaluation record, the loss curve and the model.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub eval: EvalResult,
    pub loss_curve: Vec<f64>,
    pub model: ModelState,
}

/// Initializes and trains the model of one `(dataset, arch, tau, seed_index)`
/// unit. Returns the model and its loss curve.
pub fn train_unit(
    dtdg: &Dtdg,
    arch: Arch,
    tau: Tau,
    seed_index: u64,
    cfg: &ExperimentConfig,
) -> Result<(ModelState, Vec<f64>)> {
    let split = chronological_split(dtdg.len(), cfg.train_fraction)?;
    let seed = derive_seed(cfg.master_seed, dtdg.name(), arch, tau, seed_index);
    let mut model = ModelState::new(
        arch,
        dtdg.num_nodes(),
        cfg.hyper,
        &mut substream(seed, STREAM_INIT),
    )?;
    let curve = train(
        &mut model,
        dtdg,
        tau,
        &split,
        &cfg.train,
        &mut substream(seed, STREAM_TRAIN),
    )?;
    Ok((model, curve))
}

/// Rolling evaluation of a unit's model on the dataset's shared negatives.
pub fn evaluate_unit(
    model: &ModelState,
    dtdg: &Dtdg,
    tau: Tau,
    seed_index: u64,
    cfg: &ExperimentConfig,
) -> Result<EvalResult> {
    let split = chronological_split(dtdg.len(), cfg.train_fraction)?;
    let mut eval = rolling_evaluate(
        model,
        dtdg,
        tau,
        &split,
        eval_seed(cfg.master_seed, dtdg.name()),
    )?;
    eval.seed = seed_index;
    Ok(eval)
}

/// Init, train and evaluate one `(dataset, arch, tau, seed_index)` unit.
pub fn run_experiment(
    dtdg: &Dtdg,
    arch: Arch,
    tau: Tau,
    seed_index: u64,
    cfg: &ExperimentConfig,
) -> Result<RunOutcome> {
    let started = Instant::now();
    let (model, loss_curve) = train_unit(dtdg, arch, tau, seed_index, cfg)?;
    let mut eval = evaluate_unit(&model, dtdg, tau, seed_index, cfg)?;
    eval.wall_time_ms = started.elapsed().as_millis() as u64;
    Ok(RunOutcome {
        eval,
        loss_curve,
        model,
    })
}
