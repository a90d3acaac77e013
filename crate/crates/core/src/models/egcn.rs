//! EvolveGCN-H: a GRU evolves the GCN weight matrix from one snapshot to the
//! next, fed by a summary of the current node states.
//!
//! The summary is the mean of `H` over the snapshot's active nodes (all nodes
//! when none are active), broadcast to every column of the GRU input.

use rand::Rng;

use super::layers::{gcn_layer, ones};
use super::{window_adjacency, Bound, Hyper};
use crate::dtdg::{Snapshot, TemporalWindow};
use crate::tensor::{ParamSet, Tape, Tensor, TensorError, Var};

const GATES: [&str; 3] = ["update", "reset", "cand"];

pub(super) fn register<R: Rng + ?Sized>(
    params: &mut ParamSet,
    h: &Hyper,
    rng: &mut R,
) -> Result<(), TensorError> {
    let d = h.hidden;
    params.register("egcn.w_in", Tensor::glorot(h.d_in, d, rng))?;
    params.register("egcn.theta0", Tensor::glorot(d, d, rng))?;
    for g in GATES {
        params.register(&format!("egcn.w.{g}"), Tensor::glorot(d, d, rng))?;
        params.register(&format!("egcn.u.{g}"), Tensor::glorot(d, d, rng))?;
        params.register(&format!("egcn.b.{g}"), Tensor::zeros(d, d))?;
    }
    Ok(())
}

pub(super) struct WeightGru {
    w: [Var; 3],
    u: [Var; 3],
    b: [Var; 3],
}

impl WeightGru {
    pub(super) fn bind(bound: &Bound<'_>) -> Result<Self, TensorError> {
        let pick = |p: &str| -> Result<[Var; 3], TensorError> {
            Ok([
                bound.get(&format!("egcn.{p}.update"))?,
                bound.get(&format!("egcn.{p}.reset"))?,
                bound.get(&format!("egcn.{p}.cand"))?,
            ])
        };
        Ok(Self {
            w: pick("w")?,
            u: pick("u")?,
            b: pick("b")?,
        })
    }

    /// `Θ' = Θ + z ∘ (c - Θ)` with update gate `z`, reset gate `r` and
    /// candidate `c = tanh(W x + U (r ∘ Θ) + B)`.
    pub(super) fn step(&self, tape: &mut Tape, input: Var, theta: Var) -> Result<Var, TensorError> {
        let gate = |tape: &mut Tape, k: usize, state: Var| -> Result<Var, TensorError> {
            let wx = tape.matmul(self.w[k], input)?;
            let uh = tape.matmul(self.u[k], state)?;
            let s = tape.add(wx, uh)?;
            tape.add(s, self.b[k])
        };
        let z = gate(tape, 0, theta)?;
        let z = tape.sigmoid(z)?;
        let r = gate(tape, 1, theta)?;
        let r = tape.sigmoid(r)?;
        let reset_theta = tape.mul(r, theta)?;
        let c = gate(tape, 2, reset_theta)?;
        let c = tape.tanh(c)?;
        let delta = tape.sub(c, theta)?;
        let moved = tape.mul(z, delta)?;
        tape.add(theta, moved)
    }
}

/// `d×d` GRU input whose every column is the mean of `H` over active nodes.
fn summary_input(
    tape: &mut Tape,
    snapshot: &Snapshot,
    h: Var,
    n: usize,
) -> Result<Var, TensorError> {
    let d = tape.shape(h).1;
    let mut pool = Tensor::zeros(1, n);
    if snapshot.active_nodes().is_empty() {
        pool.data_mut().fill(1.0 / n as f64);
    } else {
        let w = 1.0 / snapshot.active_nodes().len() as f64;
        for &v in snapshot.active_nodes() {
            pool.set(0, v, w);
        }
    }
    let pool = tape.constant(pool);
    let mean = tape.matmul(pool, h)?;
    let col = tape.transpose(mean)?;
    let spread = ones(tape, 1, d);
    tape.matmul(col, spread)
}

/// Weight matrices after each snapshot of the window (for inspection).
pub fn evolve_weights(
    model: &super::ModelState,
    window: &TemporalWindow<'_>,
) -> crate::Result<Vec<Tensor>> {
    let mut tape = Tape::new();
    let bound = model.bind(&mut tape);
    let (_, thetas) = run(&mut tape, &bound, window, model.num_nodes())?;
    Ok(thetas.iter().map(|&t| tape.value(t).clone()).collect())
}

fn run(
    tape: &mut Tape,
    bound: &Bound<'_>,
    window: &TemporalWindow<'_>,
    n: usize,
) -> Result<(Var, Vec<Var>), TensorError> {
    let gru = WeightGru::bind(bound)?;
    let x = bound.get("embed")?;
    let w_in = bound.get("egcn.w_in")?;
    let mut theta = bound.get("egcn.theta0")?;
    let adj = window_adjacency(tape, window, n);
    let mut h = tape.matmul(x, w_in)?;
    let mut thetas = Vec::with_capacity(adj.len());
    for (snapshot, a_hat) in window.snapshots.iter().zip(adj) {
        let input = summary_input(tape, snapshot, h, n)?;
        theta = gru.step(tape, input, theta)?;
        thetas.push(theta);
        h = gcn_layer(tape, a_hat, h, theta)?;
    }
    Ok((h, thetas))
}

pub(super) fn encode(
    tape: &mut Tape,
    bound: &Bound<'_>,
    window: &TemporalWindow<'_>,
    n: usize,
) -> Result<Var, TensorError> {
    Ok(run(tape, bound, window, n)?.0)
}
