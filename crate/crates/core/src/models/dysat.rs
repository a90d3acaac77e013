//! DySAT: multi-head structural attention on each snapshot, then temporal
//! self-attention across the window with learned position embeddings.

use rand::Rng;

use super::layers::ones;
use super::{Bound, Hyper, ModelState};
use crate::dtdg::TemporalWindow;
use crate::error::{Error, Result};
use crate::tensor::{ParamSet, Tape, Tensor, TensorError, Var};

const MASKED: f64 = -1e30;
const LEAKY_SLOPE: f64 = 0.2;

pub(super) fn register<R: Rng + ?Sized>(
    params: &mut ParamSet,
    h: &Hyper,
    rng: &mut R,
) -> std::result::Result<(), TensorError> {
    let head_dim = h.hidden / h.heads;
    for k in 0..h.heads {
        params.register(
            &format!("dysat.w.{k}"),
            Tensor::glorot(h.d_in, head_dim, rng),
        )?;
        params.register(
            &format!("dysat.a_src.{k}"),
            Tensor::glorot(head_dim, 1, rng),
        )?;
        params.register(
            &format!("dysat.a_dst.{k}"),
            Tensor::glorot(head_dim, 1, rng),
        )?;
    }
    params.register("dysat.pos", Tensor::glorot(h.max_positions, h.hidden, rng))?;
    for name in ["dysat.wq", "dysat.wk", "dysat.wv"] {
        params.register(name, Tensor::glorot(h.hidden, h.hidden, rng))?;
    }
    Ok(())
}

/// Additive mask: 0 where `Â` has support (neighbors and self), else -1e30.
fn support_mask(a_hat: &Tensor) -> Tensor {
    a_hat.map(|x| if x != 0.0 { 0.0 } else { MASKED })
}

/// GAT-style attention over the snapshot's neighborhoods, heads concatenated.
fn structural(
    tape: &mut Tape,
    bound: &Bound<'_>,
    a_hat: &Tensor,
    heads: usize,
) -> std::result::Result<Var, TensorError> {
    let n = a_hat.rows();
    let x = bound.get("embed")?;
    let mask = tape.constant(support_mask(a_hat));
    let row_ones = ones(tape, 1, n);
    let col_ones = ones(tape, n, 1);
    let mut outs = Vec::with_capacity(heads);
    for k in 0..heads {
        let w = bound.get(&format!("dysat.w.{k}"))?;
        let a_src = bound.get(&format!("dysat.a_src.{k}"))?;
        let a_dst = bound.get(&format!("dysat.a_dst.{k}"))?;
        let hk = tape.matmul(x, w)?;
        let s_src = tape.matmul(hk, a_src)?;
        let s_dst = tape.matmul(hk, a_dst)?;
        // e[u][v] = s_src[u] + s_dst[v]
        let left = tape.matmul(s_src, row_ones)?;
        let s_dst_t = tape.transpose(s_dst)?;
        let right = tape.matmul(col_ones, s_dst_t)?;
        let e = tape.add(left, right)?;
        let e = tape.leaky_relu(e, LEAKY_SLOPE)?;
        let e = tape.add(e, mask)?;
        let alpha = tape.softmax_rows(e)?;
        let mixed = tape.matmul(alpha, hk)?;
        outs.push(tape.tanh(mixed)?);
    }
    tape.concat_cols(&outs)
}

/// Returns `Z` and the `n × L` temporal attention weights of the last position.
pub(super) fn encode(
    tape: &mut Tape,
    bound: &Bound<'_>,
    window: &TemporalWindow<'_>,
    n: usize,
    hyper: &Hyper,
) -> Result<(Var, Var)> {
    let len = window.len();
    if len > hyper.max_positions {
        return Err(Error::config(format!(
            "window of {len} snapshots exceeds {} DySAT positions",
            hyper.max_positions
        )));
    }
    let d = hyper.hidden;
    let pos = bound.get("dysat.pos")?;
    let (wq, wk, wv) = (
        bound.get("dysat.wq")?,
        bound.get("dysat.wk")?,
        bound.get("dysat.wv")?,
    );

    let adj: Vec<Tensor> = window
        .snapshots
        .iter()
        .map(|s| s.normalized_adjacency(n))
        .collect();
    let mut inputs = Vec::with_capacity(len);
    for (k, a_hat) in adj.iter().enumerate() {
        let hk = structural(tape, bound, a_hat, hyper.heads)?;
        // Positions are relative to the window end: the newest snapshot always
        // uses the last row of the table.
        let p = tape.slice_rows(pos, hyper.max_positions - len + k, 1)?;
        inputs.push(tape.add_row(hk, p)?);
    }

    let q = tape.matmul(inputs[len - 1], wq)?;
    let d_ones = ones(tape, d, 1);
    let mut scores = Vec::with_capacity(len);
    let mut values = Vec::with_capacity(len);
    for &inp in &inputs {
        let key = tape.matmul(inp, wk)?;
        let qk = tape.mul(q, key)?;
        let dot = tape.matmul(qk, d_ones)?;
        scores.push(tape.scale(dot, 1.0 / (d as f64).sqrt())?);
        values.push(tape.matmul(inp, wv)?);
    }
    let logits = tape.concat_cols(&scores)?;
    let alpha = tape.softmax_rows(logits)?;

    let spread = ones(tape, 1, d);
    let mut z: Option<Var> = None;
    for (k, &v) in values.iter().enumerate() {
        let mut pick = Tensor::zeros(len, 1);
        pick.set(k, 0, 1.0);
        let pick = tape.constant(pick);
        let a_k = tape.matmul(alpha, pick)?;
        let a_k = tape.matmul(a_k, spread)?;
        let term = tape.mul(a_k, v)?;
        z = Some(match z {
            None => term,
            Some(acc) => tape.add(acc, term)?,
        });
    }
    Ok((z.expect("window is non-empty"), alpha))
}

/// Temporal attention weights (`n × |window|`) of the newest position.
pub fn temporal_attention_weights(
    model: &ModelState,
    window: &TemporalWindow<'_>,
) -> Result<Tensor> {
    if model.arch() != super::Arch::Dysat {
        return Err(Error::config(
            "temporal attention weights exist only for DySAT",
        ));
    }
    let mut tape = Tape::new();
    let bound = model.bind(&mut tape);
    let (_, alpha) = encode(&mut tape, &bound, window, model.num_nodes(), model.hyper())?;
    Ok(tape.value(alpha).clone())
}
