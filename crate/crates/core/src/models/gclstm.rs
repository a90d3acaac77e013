//! GC-LSTM: an LSTM whose input and recurrent projections are graph
//! convolutions over the current snapshot.

use rand::Rng;

use super::{window_adjacency, Bound, Hyper};
use crate::dtdg::TemporalWindow;
use crate::tensor::{ParamSet, Tape, Tensor, TensorError, Var};

pub(super) const GATES: [&str; 4] = ["i", "f", "o", "c"];

pub(super) fn register<R: Rng + ?Sized>(
    params: &mut ParamSet,
    h: &Hyper,
    rng: &mut R,
) -> Result<(), TensorError> {
    for g in GATES {
        params.register(
            &format!("gclstm.wx.{g}"),
            Tensor::glorot(h.d_in, h.hidden, rng),
        )?;
        params.register(
            &format!("gclstm.wh.{g}"),
            Tensor::glorot(h.hidden, h.hidden, rng),
        )?;
        params.register(&format!("gclstm.b.{g}"), Tensor::zeros(1, h.hidden))?;
    }
    Ok(())
}

pub(super) struct Cell {
    wx: [Var; 4],
    wh: [Var; 4],
    b: [Var; 4],
}

impl Cell {
    pub(super) fn bind(bound: &Bound<'_>) -> Result<Self, TensorError> {
        let pick = |prefix: &str| -> Result<[Var; 4], TensorError> {
            let v: Vec<Var> = GATES
                .iter()
                .map(|g| bound.get(&format!("gclstm.{prefix}.{g}")))
                .collect::<Result<_, _>>()?;
            Ok([v[0], v[1], v[2], v[3]])
        };
        Ok(Self {
            wx: pick("wx")?,
            wh: pick("wh")?,
            b: pick("b")?,
        })
    }

    /// One step: gates are `Â X Wx + Â h Wh + b`; returns the new `(h, c)`.
    pub(super) fn step(
        &self,
        tape: &mut Tape,
        a_hat: Var,
        x: Var,
        h: Var,
        c: Var,
    ) -> Result<(Var, Var), TensorError> {
        let ax = tape.matmul(a_hat, x)?;
        let ah = tape.matmul(a_hat, h)?;
        let mut pre = [h; 4];
        for (k, gate) in pre.iter_mut().enumerate() {
            let from_x = tape.matmul(ax, self.wx[k])?;
            let from_h = tape.matmul(ah, self.wh[k])?;
            let s = tape.add(from_x, from_h)?;
            *gate = tape.add_row(s, self.b[k])?;
        }
        let i = tape.sigmoid(pre[0])?;
        let f = tape.sigmoid(pre[1])?;
        let o = tape.sigmoid(pre[2])?;
        let g = tape.tanh(pre[3])?;
        let keep = tape.mul(f, c)?;
        let write = tape.mul(i, g)?;
        let c_new = tape.add(keep, write)?;
        let squashed = tape.tanh(c_new)?;
        let h_new = tape.mul(o, squashed)?;
        Ok((h_new, c_new))
    }
}

/// Runs the cell oldest to newest from zero state; `Z` is the final `h`.
pub(super) fn encode(
    tape: &mut Tape,
    bound: &Bound<'_>,
    window: &TemporalWindow<'_>,
    n: usize,
    hyper: &Hyper,
) -> Result<Var, TensorError> {
    let cell = Cell::bind(bound)?;
    let x = bound.get("embed")?;
    let adj = window_adjacency(tape, window, n);
    let mut h = tape.constant(Tensor::zeros(n, hyper.hidden));
    let mut c = tape.constant(Tensor::zeros(n, hyper.hidden));
    for a_hat in adj {
        (h, c) = cell.step(tape, a_hat, x, h, c)?;
    }
    Ok(h)
}
