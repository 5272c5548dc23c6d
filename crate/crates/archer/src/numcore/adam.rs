//! Adam optimizer with bias correction.

use crate::error::{Error, Result};
use crate::numcore::{MlpGradients, MlpParams};

const DEFAULT_BETA1: f64 = 0.9;
const DEFAULT_BETA2: f64 = 0.999;
const DEFAULT_EPS: f64 = 1e-8;

/// First/second moment accumulators for one network, plus the step counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: MlpGradients,
    v: MlpGradients,
    step: u64,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl AdamState {
    /// Zero moments shaped like `params`, with the standard constants
    /// β1=0.9, β2=0.999, ε=1e-8.
    pub fn new(params: &MlpParams) -> Self {
        AdamState {
            m: MlpGradients::zeros_like(params),
            v: MlpGradients::zeros_like(params),
            step: 0,
            beta1: DEFAULT_BETA1,
            beta2: DEFAULT_BETA2,
            eps: DEFAULT_EPS,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn set_step_count(&mut self, step: u64) {
        self.step = step;
    }
}

/// One bias-corrected Adam update, in place. Increments the step counter.
///
/// A non-finite gradient is rejected before anything is mutated.
pub fn adam_step(
    params: &mut MlpParams,
    grads: &MlpGradients,
    state: &mut AdamState,
    lr: f64,
) -> Result<()> {
    assert!(lr > 0.0, "learning rate must be positive");
    if grads.layers.len() != params.layers().len() {
        return Err(Error::shape(
            "adam_step layer count",
            params.layers().len(),
            grads.layers.len(),
        ));
    }
    for (layer, g) in params.layers().iter().zip(&grads.layers) {
        if g.weight.rows() != layer.weight.rows()
            || g.weight.cols() != layer.weight.cols()
            || g.bias.len() != layer.bias.len()
        {
            return Err(Error::shape(
                "adam_step layer shape",
                layer.weight.data().len(),
                g.weight.data().len(),
            ));
        }
    }
    if !grads.is_finite() {
        return Err(Error::Numeric("adam_step gradient"));
    }

    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    let (b1, b2, eps) = (state.beta1, state.beta2, state.eps);

    for (l, layer) in params.layers_mut().iter_mut().enumerate() {
        let g = &grads.layers[l];
        let mw = state.m.layers[l].weight.data_mut();
        let vw = state.v.layers[l].weight.data_mut();
        for (i, p) in layer.weight.data_mut().iter_mut().enumerate() {
            let gv = g.weight.data()[i];
            mw[i] = b1 * mw[i] + (1.0 - b1) * gv;
            vw[i] = b2 * vw[i] + (1.0 - b2) * gv * gv;
            *p -= lr * (mw[i] / bc1) / ((vw[i] / bc2).sqrt() + eps);
        }
        let mb = &mut state.m.layers[l].bias;
        let vb = &mut state.v.layers[l].bias;
        for (i, p) in layer.bias.iter_mut().enumerate() {
            let gv = g.bias[i];
            mb[i] = b1 * mb[i] + (1.0 - b1) * gv;
            vb[i] = b2 * vb[i] + (1.0 - b2) * gv * gv;
            *p -= lr * (mb[i] / bc1) / ((vb[i] / bc2).sqrt() + eps);
        }
    }
    Ok(())
}
