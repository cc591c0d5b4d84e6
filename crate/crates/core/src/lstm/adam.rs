use serde::{Deserialize, Serialize};

use super::params::LstmParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First and second moment estimates plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: LstmParams,
    pub v: LstmParams,
    pub t: u64,
}

impl AdamState {
    pub fn new(like: &LstmParams) -> Self {
        Self {
            m: like.zeros_like(),
            v: like.zeros_like(),
            t: 0,
        }
    }
}

/// Bias-corrected Adam update applied in place.
pub fn adam_step(params: &mut LstmParams, grads: &LstmParams, state: &mut AdamState, cfg: &AdamConfig) {
    state.t += 1;
    let t = state.t as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    let tensors = params
        .tensors_mut()
        .into_iter()
        .zip(grads.tensors())
        .zip(state.m.tensors_mut().into_iter().zip(state.v.tensors_mut()));
    for ((theta, g), (m, v)) in tensors {
        for j in 0..theta.len() {
            m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
            v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
            let m_hat = m[j] / c1;
            let v_hat = v[j] / c2;
            theta[j] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_problem() -> (LstmParams, LstmParams) {
        // Smallest model has many slots; only the first one carries a gradient.
        let p = LstmParams::zeros(1, 1);
        let mut g = p.zeros_like();
        g.gates[0].w[0] = 1.0;
        (p, g)
    }

    #[test]
    fn zero_gradient_is_noop() {
        let mut p = super::super::init_params(2, 2, 1);
        let before = p.clone();
        let g = p.zeros_like();
        let mut s = AdamState::new(&p);
        adam_step(&mut p, &g, &mut s, &AdamConfig::default());
        assert_eq!(p, before);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn first_step_by_hand() {
        let (mut p, g) = scalar_problem();
        let mut s = AdamState::new(&p);
        adam_step(&mut p, &g, &mut s, &AdamConfig::default());
        let expected = -0.001 * (1.0 / (1.0 + 1e-8));
        assert!((p.gates[0].w[0] - expected).abs() < 1e-18);
        assert!((p.gates[0].w[0] + 0.000999999990).abs() < 1e-14);
    }

    #[test]
    fn second_step_no_larger() {
        let (mut p, g) = scalar_problem();
        let mut s = AdamState::new(&p);
        let cfg = AdamConfig::default();
        adam_step(&mut p, &g, &mut s, &cfg);
        let d1 = p.gates[0].w[0].abs();
        let before = p.gates[0].w[0];
        adam_step(&mut p, &g, &mut s, &cfg);
        let d2 = (p.gates[0].w[0] - before).abs();
        assert!(d2 <= d1);
    }
}
