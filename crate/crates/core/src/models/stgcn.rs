//! STGCN block: gated causal temporal convolution, per-frame GCN, second
//! gated temporal convolution. `Z` is the newest output frame.

use rand::Rng;

use super::layers::{gcn_layer, temporal_conv, ConvKernel};
use super::{window_adjacency, Bound, Hyper};
use crate::dtdg::TemporalWindow;
use crate::tensor::{ParamSet, Tape, Tensor, TensorError, Var};

pub(super) fn register<R: Rng + ?Sized>(
    params: &mut ParamSet,
    h: &Hyper,
    rng: &mut R,
) -> Result<(), TensorError> {
    let d = h.hidden;
    for (block, d_in) in [("tcn1", h.d_in), ("tcn2", d)] {
        for part in ["p", "q"] {
            for j in 0..h.kernel {
                params.register(
                    &format!("stgcn.{block}.{part}.{j}"),
                    Tensor::glorot(d_in, d, rng),
                )?;
            }
            params.register(&format!("stgcn.{block}.b{part}"), Tensor::zeros(1, d))?;
        }
    }
    params.register("stgcn.gcn.w", Tensor::glorot(d, d, rng))?;
    Ok(())
}

fn kernel_vars(
    bound: &Bound<'_>,
    block: &str,
    part: &str,
    width: usize,
) -> Result<(Vec<Var>, Var), TensorError> {
    let taps = (0..width)
        .map(|j| bound.get(&format!("stgcn.{block}.{part}.{j}")))
        .collect::<Result<_, _>>()?;
    Ok((taps, bound.get(&format!("stgcn.{block}.b{part}"))?))
}

pub(super) fn encode(
    tape: &mut Tape,
    bound: &Bound<'_>,
    window: &TemporalWindow<'_>,
    n: usize,
    hyper: &Hyper,
) -> Result<Var, TensorError> {
    let w = hyper.kernel;
    let len = window.len();
    let x = bound.get("embed")?;
    let adj = window_adjacency(tape, window, n);
    let frames = vec![x; len];

    let (p1, bp1) = kernel_vars(bound, "tcn1", "p", w)?;
    let (q1, bq1) = kernel_vars(bound, "tcn1", "q", w)?;
    let (p2, bp2) = kernel_vars(bound, "tcn2", "p", w)?;
    let (q2, bq2) = kernel_vars(bound, "tcn2", "q", w)?;
    let gcn_w = bound.get("stgcn.gcn.w")?;

    // The newest output frame reads the last `w` middle frames, which in turn
    // need the first convolution only at those positions.
    let needed: Vec<usize> = (len.saturating_sub(w)..len).collect();
    let first = temporal_conv(
        tape,
        &frames,
        &ConvKernel {
            taps: &p1,
            bias: Some(bp1),
        },
        Some(&ConvKernel {
            taps: &q1,
            bias: Some(bq1),
        }),
        &needed,
    )?;
    // Middle frames outside `needed` are never read; a zero constant stands in.
    let filler = tape.constant(Tensor::zeros(n, hyper.hidden));
    let mut middle = vec![filler; len];
    for (&i, &f) in needed.iter().zip(&first) {
        middle[i] = gcn_layer(tape, adj[i], f, gcn_w)?;
    }
    let out = temporal_conv(
        tape,
        &middle,
        &ConvKernel {
            taps: &p2,
            bias: Some(bp2),
        },
        Some(&ConvKernel {
            taps: &q2,
            bias: Some(bq2),
        }),
        &[len - 1],
    )?;
    Ok(out[0])
}
