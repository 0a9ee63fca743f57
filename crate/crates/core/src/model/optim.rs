use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmsPropConfig {
    pub lr: f64,
    pub decay: f64,
    pub epsilon: f64,
}

impl Default for RmsPropConfig {
    fn default() -> Self {
        RmsPropConfig { lr: 1e-3, decay: 0.9, epsilon: 1e-8 }
    }
}

/// Elementwise RMSprop: `s ← ρ·s + (1−ρ)·g²`, `θ ← θ − lr·g / (√s + ε)`.
pub fn rmsprop_step(params: &mut [f64], grads: &[f64], state: &mut [f64], cfg: &RmsPropConfig) {
    assert_eq!(params.len(), grads.len(), "parameter/gradient shape mismatch");
    assert_eq!(params.len(), state.len(), "parameter/state shape mismatch");
    let rho = cfg.decay;
    for ((p, &g), s) in params.iter_mut().zip(grads).zip(state.iter_mut()) {
        *s = rho * *s + (1.0 - rho) * g * g;
        *p -= cfg.lr * g / (s.sqrt() + cfg.epsilon);
    }
}
