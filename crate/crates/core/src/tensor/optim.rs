use super::{ParamSet, Tensor, TensorError};

/// Adam moment buffers and hyperparameters.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    first: Vec<Tensor>,
    second: Vec<Tensor>,
}

impl OptimizerState {
    pub fn new(params: &ParamSet, lr: f64) -> Self {
        let zeros: Vec<Tensor> = params
            .ids()
            .map(|id| {
                let (r, c) = params.value(id).shape();
                Tensor::zeros(r, c)
            })
            .collect();
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            first: zeros.clone(),
            second: zeros,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// One bias-corrected Adam update over every parameter, then zeroes the grads.
pub fn adam_step(params: &mut ParamSet, opt: &mut OptimizerState) -> Result<(), TensorError> {
    if let Some(id) = params.ids().find(|&id| params.grad(id).is_none()) {
        return Err(TensorError::MissingGrad(params.name(id).to_string()));
    }
    if opt.first.len() != params.len() {
        return Err(TensorError::Argument {
            op: "adam_step",
            message: format!(
                "optimizer tracks {} parameters, set has {}",
                opt.first.len(),
                params.len()
            ),
        });
    }
    opt.step += 1;
    let bc1 = 1.0 - opt.beta1.powi(opt.step as i32);
    let bc2 = 1.0 - opt.beta2.powi(opt.step as i32);
    let ids: Vec<_> = params.ids().collect();
    for id in ids {
        let (value, grad) = params.value_and_grad_mut(id);
        let grad = grad.expect("checked above");
        let m = opt.first[id.index()].data_mut();
        let v = opt.second[id.index()].data_mut();
        for (((p, g), m), v) in value
            .data_mut()
            .iter_mut()
            .zip(grad.data())
            .zip(m.iter_mut())
            .zip(v.iter_mut())
        {
            *m = opt.beta1 * *m + (1.0 - opt.beta1) * g;
            *v = opt.beta2 * *v + (1.0 - opt.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= opt.lr * m_hat / (v_hat.sqrt() + opt.eps);
        }
        grad.data_mut().fill(0.0);
    }
    Ok(())
}
