use serde::{Deserialize, Serialize};

use super::Params;
use crate::error::{Error, Result};

/// Optimizer hyperparameters and run length for full-batch training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub iterations: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Evaluate every this many iterations (one iteration is one epoch in
    /// full-batch training). The final state is always evaluated.
    pub eval_every: usize,
    /// Keep the parameters with the lowest evaluation MSE.
    pub best_checkpoint: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            iterations: 1000,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 1,
            eval_every: 1,
            best_checkpoint: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok_beta = |b: f64| b > 0.0 && b < 1.0;
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !ok_beta(self.beta1) || !ok_beta(self.beta2) {
            return Err(Error::InvalidArgument(format!(
                "betas must lie in (0, 1), got {} and {}",
                self.beta1, self.beta2
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidArgument("epsilon must be positive".into()));
        }
        if self.eval_every == 0 {
            return Err(Error::InvalidArgument("eval_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// First and second moment estimates, congruent with the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Params,
    pub v: Params,
    pub t: u64,
}

impl AdamState {
    pub fn new(params: &Params) -> Self {
        Self {
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
        }
    }
}

/// One Adam update with bias correction:
/// `p ← p - lr · m̂ / (√v̂ + ε)`, `m̂ = m / (1 - β₁ᵗ)`, `v̂ = v / (1 - β₂ᵗ)`.
///
/// Non-finite gradients leave parameters and state untouched.
pub fn adam_step(
    params: &mut Params,
    grads: &Params,
    state: &mut AdamState,
    config: &TrainConfig,
) -> Result<()> {
    if !params.congruent(grads) || !params.congruent(&state.m) || !params.congruent(&state.v) {
        return Err(Error::Shape("gradients or moments do not match the parameters".into()));
    }
    for (i, layer) in grads.layers().iter().enumerate() {
        if layer.slices().iter().any(|s| s.iter().any(|g| !g.is_finite())) {
            return Err(Error::NonFinite(format!(
                "gradient of layer {} contains NaN or infinity; step skipped",
                i + 1
            )));
        }
    }
    state.t += 1;
    let (b1, b2) = (config.beta1, config.beta2);
    let c1 = 1.0 - b1.powf(state.t as f64);
    let c2 = 1.0 - b2.powf(state.t as f64);
    let (lr, eps) = (config.learning_rate, config.epsilon);

    let m_layers = state.m.layers_mut();
    let v_layers = state.v.layers_mut();
    for (((p, g), m), v) in params
        .layers_mut()
        .iter_mut()
        .zip(grads.layers())
        .zip(m_layers.iter_mut())
        .zip(v_layers.iter_mut())
    {
        for (((ps, gs), ms), vs) in p
            .slices_mut()
            .into_iter()
            .zip(g.slices())
            .zip(m.slices_mut())
            .zip(v.slices_mut())
        {
            for (((p, &g), m), v) in ps.iter_mut().zip(gs).zip(ms.iter_mut()).zip(vs.iter_mut()) {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *p -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
    }
    Ok(())
}
