//! Building blocks shared by the encoders.

use crate::tensor::{Tape, Tensor, TensorError, Var};

type Result<T> = std::result::Result<T, TensorError>;

/// `relu(Â H W)`.
pub fn gcn_layer(tape: &mut Tape, a_hat: Var, h: Var, w: Var) -> Result<Var> {
    let (n, d_in) = tape.shape(h);
    let (an, am) = tape.shape(a_hat);
    if an != n || am != n {
        return Err(TensorError::Shape {
            op: "gcn_layer",
            lhs: (an, am),
            rhs: (n, d_in),
        });
    }
    let hw = tape.matmul(h, w)?;
    let propagated = tape.matmul(a_hat, hw)?;
    tape.relu(propagated)
}

/// Causal kernel taps for [`temporal_conv`]: `taps[j]` multiplies the frame
/// `j` steps in the past.
pub struct ConvKernel<'a> {
    pub taps: &'a [Var],
    pub bias: Option<Var>,
}

/// Causal 1-D convolution over a sequence of `n×d` frames.
///
/// Output frame `i` is `sum_j frames[i - j] · taps[j]`; frames before the
/// start of the sequence are zero. With `gate = Some(..)` the result is the
/// gated linear unit `P ∘ σ(Q)` with `P` from `value` and `Q` from `gate`.
/// Only the output frames listed in `wanted` are computed.
pub fn temporal_conv(
    tape: &mut Tape,
    frames: &[Var],
    value: &ConvKernel<'_>,
    gate: Option<&ConvKernel<'_>>,
    wanted: &[usize],
) -> Result<Vec<Var>> {
    let conv = |tape: &mut Tape, k: &ConvKernel<'_>, i: usize| -> Result<Var> {
        let mut acc: Option<Var> = None;
        for (j, &tap) in k.taps.iter().enumerate() {
            if j > i {
                break;
            }
            let term = tape.matmul(frames[i - j], tap)?;
            acc = Some(match acc {
                None => term,
                Some(a) => tape.add(a, term)?,
            });
        }
        let acc = acc.expect("tap 0 always applies");
        match k.bias {
            Some(b) => tape.add_row(acc, b),
            None => Ok(acc),
        }
    };
    if value.taps.is_empty() || gate.is_some_and(|g| g.taps.is_empty()) {
        return Err(TensorError::Argument {
            op: "temporal_conv",
            message: "kernel has no taps".into(),
        });
    }
    let mut out = Vec::with_capacity(wanted.len());
    for &i in wanted {
        if i >= frames.len() {
            return Err(TensorError::Argument {
                op: "temporal_conv",
                message: format!("frame {i} of {}", frames.len()),
            });
        }
        let p = conv(tape, value, i)?;
        let y = match gate {
            Some(g) => {
                let q = conv(tape, g, i)?;
                let sq = tape.sigmoid(q)?;
                tape.mul(p, sq)?
            }
            None => p,
        };
        out.push(y);
    }
    Ok(out)
}

/// Column vector of ones, for row sums and broadcasts through `matmul`.
pub(crate) fn ones(tape: &mut Tape, rows: usize, cols: usize) -> Var {
    tape.constant(Tensor::ones(rows, cols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gcn_identity_propagation() {
        let mut tape = Tape::new();
        let a = tape.constant(Tensor::identity(3));
        let h_val = Tensor::from_rows(&[vec![0.5, 1.0], vec![2.0, 0.0], vec![0.1, 0.3]]).unwrap();
        let h = tape.constant(h_val.clone());
        let w = tape.constant(Tensor::identity(2));
        let out = gcn_layer(&mut tape, a, h, w).unwrap();
        assert_eq!(tape.value(out), &h_val);
    }

    #[test]
    fn gcn_matches_dense_oracle_on_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a_hat = crate::dtdg::Snapshot::from_edges(0, &[(0, 1), (1, 2)], 3)
            .unwrap()
            .normalized_adjacency(3);
        let w = Tensor::glorot(3, 4, &mut rng);
        let mut tape = Tape::new();
        let (av, hv, wv) = (
            tape.constant(a_hat.clone()),
            tape.constant(Tensor::identity(3)),
            tape.constant(w.clone()),
        );
        let out = gcn_layer(&mut tape, av, hv, wv).unwrap();
        // One-hot H means out[i][k] = relu(sum_j a[i][j] * w[j][k]).
        for i in 0..3 {
            for k in 0..4 {
                let s: f64 = (0..3).map(|j| a_hat.get(i, j) * w.get(j, k)).sum();
                assert!((tape.value(out).get(i, k) - s.max(0.0)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn identity_kernel_without_gate_is_passthrough() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut tape = Tape::new();
        let frames: Vec<Var> = (0..4)
            .map(|_| tape.constant(Tensor::glorot(3, 2, &mut rng)))
            .collect();
        let taps = [
            tape.constant(Tensor::identity(2)),
            tape.constant(Tensor::zeros(2, 2)),
            tape.constant(Tensor::zeros(2, 2)),
        ];
        let k = ConvKernel {
            taps: &taps,
            bias: None,
        };
        let out = temporal_conv(&mut tape, &frames, &k, None, &[0, 1, 2, 3]).unwrap();
        for (o, f) in out.iter().zip(&frames) {
            assert_eq!(tape.value(*o), tape.value(*f));
        }
    }

    #[test]
    fn convolution_is_causal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let base: Vec<Tensor> = (0..4).map(|_| Tensor::glorot(3, 2, &mut rng)).collect();
        let taps_v: Vec<Tensor> = (0..2).map(|_| Tensor::glorot(2, 2, &mut rng)).collect();
        let taps_g: Vec<Tensor> = (0..2).map(|_| Tensor::glorot(2, 2, &mut rng)).collect();
        let run = |frames: &[Tensor]| -> Vec<Tensor> {
            let mut tape = Tape::new();
            let fv: Vec<Var> = frames.iter().map(|f| tape.constant(f.clone())).collect();
            let tv: Vec<Var> = taps_v.iter().map(|t| tape.constant(t.clone())).collect();
            let tg: Vec<Var> = taps_g.iter().map(|t| tape.constant(t.clone())).collect();
            let out = temporal_conv(
                &mut tape,
                &fv,
                &ConvKernel {
                    taps: &tv,
                    bias: None,
                },
                Some(&ConvKernel {
                    taps: &tg,
                    bias: None,
                }),
                &[0, 1, 2, 3],
            )
            .unwrap();
            out.iter().map(|&v| tape.value(v).clone()).collect()
        };
        let reference = run(&base);
        for perturbed in 0..4 {
            let mut frames = base.clone();
            frames[perturbed] = frames[perturbed].map(|x| x + 0.5);
            let out = run(&frames);
            for i in 0..4 {
                let changed = out[i] != reference[i];
                // Frame i sees frames i and i-1 only (kernel width 2).
                assert_eq!(
                    changed,
                    perturbed <= i && i - perturbed < 2,
                    "frame {i} vs perturbed {perturbed}"
                );
            }
        }
    }
}
