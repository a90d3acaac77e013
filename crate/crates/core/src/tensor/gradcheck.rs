use super::{Tape, Tensor, TensorError, Var};

/// Compares tape gradients of a scalar function against central differences.
///
/// `f` records a `1×1` output on the given tape from the leaf it receives.
/// Returns the max over coordinates of `|analytic - numeric| / max(1e-8, |numeric|)`.
pub fn finite_diff_check<F>(f: F, p: &Tensor, step: f64) -> Result<f64, TensorError>
where
    F: Fn(&mut Tape, Var) -> Result<Var, TensorError>,
{
    let mut tape = Tape::new();
    let leaf = tape.leaf(p.clone());
    let out = f(&mut tape, leaf)?;
    let grads = tape.backward(out)?;
    let analytic = grads
        .wrt(leaf)
        .cloned()
        .unwrap_or_else(|| Tensor::zeros(p.rows(), p.cols()));

    let eval = |x: Tensor| -> Result<f64, TensorError> {
        let mut tape = Tape::new();
        let leaf = tape.leaf(x);
        let out = f(&mut tape, leaf)?;
        let shape = tape.shape(out);
        if shape != (1, 1) {
            return Err(TensorError::NonScalarLoss(shape));
        }
        Ok(tape.value(out).item())
    };

    let mut worst: f64 = 0.0;
    for i in 0..p.len() {
        let mut plus = p.clone();
        plus.data_mut()[i] += step;
        let mut minus = p.clone();
        minus.data_mut()[i] -= step;
        let numeric = (eval(plus)? - eval(minus)?) / (2.0 * step);
        let err = (analytic.data()[i] - numeric).abs() / numeric.abs().max(1e-8);
        worst = worst.max(err);
    }
    Ok(worst)
}
