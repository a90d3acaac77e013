//! Pair decoder: `σ(MLP([z_u ‖ z_v ‖ z_u ∘ z_v]))` with one hidden ReLU layer.
//! Pairs are read as `(min, max)` so the score is symmetric.

use rand::Rng;

use super::Bound;
use crate::dtdg::{canonical, Edge};
use crate::tensor::{sigmoid, ParamSet, Tape, Tensor, TensorError, Var};

pub(super) fn register<R: Rng + ?Sized>(
    params: &mut ParamSet,
    d: usize,
    rng: &mut R,
) -> Result<(), TensorError> {
    params.register("dec.w1", Tensor::glorot(3 * d, d, rng))?;
    params.register("dec.b1", Tensor::zeros(1, d))?;
    params.register("dec.w2", Tensor::glorot(d, 1, rng))?;
    params.register("dec.b2", Tensor::zeros(1, 1))?;
    Ok(())
}

pub(super) fn logits(
    tape: &mut Tape,
    bound: &Bound<'_>,
    z: Var,
    pairs: &[Edge],
) -> Result<Var, TensorError> {
    let (us, vs): (Vec<usize>, Vec<usize>) = pairs.iter().map(|&(u, v)| canonical(u, v)).unzip();
    let zu = tape.gather_rows(z, &us)?;
    let zv = tape.gather_rows(z, &vs)?;
    let prod = tape.mul(zu, zv)?;
    let feats = tape.concat_cols(&[zu, zv, prod])?;
    let hidden = tape.matmul(feats, bound.get("dec.w1")?)?;
    let hidden = tape.add_row(hidden, bound.get("dec.b1")?)?;
    let hidden = tape.relu(hidden)?;
    let out = tape.matmul(hidden, bound.get("dec.w2")?)?;
    tape.add_row(out, bound.get("dec.b2")?)
}

/// Edge probability for one pair, computed directly from the decoder weights
/// in `params` without a tape.
pub fn decode_edge(z: &Tensor, u: usize, v: usize, params: &ParamSet) -> crate::Result<f64> {
    let n = z.rows();
    for id in [u, v] {
        if id >= n {
            return Err(crate::Error::NodeOutOfRange { id, num_nodes: n });
        }
    }
    let get = |name: &str| {
        params
            .get(name)
            .ok_or_else(|| TensorError::UnknownParam(name.to_string()))
    };
    let (w1, b1, w2, b2) = (
        get("dec.w1")?,
        get("dec.b1")?,
        get("dec.w2")?,
        get("dec.b2")?,
    );
    let (u, v) = canonical(u, v);
    let (zu, zv) = (z.row(u), z.row(v));
    let feats: Vec<f64> = zu
        .iter()
        .chain(zv)
        .copied()
        .chain(zu.iter().zip(zv).map(|(a, b)| a * b))
        .collect();
    if feats.len() != w1.rows() {
        return Err(TensorError::Shape {
            op: "decode_edge",
            lhs: (1, feats.len()),
            rhs: w1.shape(),
        }
        .into());
    }
    let mut logit = b2.item();
    for k in 0..w1.cols() {
        let pre: f64 = b1.get(0, k)
            + feats
                .iter()
                .enumerate()
                .map(|(i, f)| f * w1.get(i, k))
                .sum::<f64>();
        logit += pre.max(0.0) * w2.get(k, 0);
    }
    Ok(sigmoid(logit))
}
