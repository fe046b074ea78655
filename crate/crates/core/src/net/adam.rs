use serde::{Deserialize, Serialize};

use super::mlp::{Gradients, Mlp};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam moments for a flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub params: AdamParams,
    pub step: u64,
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
}

impl AdamState {
    pub fn new(num_params: usize, params: AdamParams) -> Self {
        AdamState {
            params,
            step: 0,
            first_moment: vec![0.0; num_params],
            second_moment: vec![0.0; num_params],
        }
    }

    pub fn for_model(model: &Mlp, params: AdamParams) -> Self {
        AdamState::new(model.num_params(), params)
    }

    /// One bias-corrected Adam update of `params` in place.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.first_moment.len(), "adam parameter count");
        assert_eq!(grads.len(), params.len(), "adam gradient count");
        self.step += 1;
        let (c1, c2) = self.corrections();
        self.update(0, params, grads, c1, c2);
    }

    /// Updates every layer of `model` from `grads`.
    pub fn step_model(&mut self, model: &mut Mlp, grads: &Gradients) {
        assert_eq!(model.num_params(), self.first_moment.len(), "adam parameter count");
        self.step += 1;
        let (c1, c2) = self.corrections();
        let mut off = 0;
        for (layer, g) in model.layers_mut().iter_mut().zip(&grads.layers) {
            self.update(off, &mut layer.weights, &g.weights, c1, c2);
            off += layer.weights.len();
            self.update(off, &mut layer.bias, &g.bias, c1, c2);
            off += layer.bias.len();
        }
    }

    fn corrections(&self) -> (f64, f64) {
        let t = self.step as i32;
        (1.0 - self.params.beta1.powi(t), 1.0 - self.params.beta2.powi(t))
    }

    fn update(&mut self, offset: usize, params: &mut [f64], grads: &[f64], c1: f64, c2: f64) {
        let AdamParams {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.params;
        let m = &mut self.first_moment[offset..offset + params.len()];
        let v = &mut self.second_moment[offset..offset + params.len()];
        for i in 0..params.len() {
            let g = grads[i];
            m[i] = beta1 * m[i] + (1.0 - beta1) * g;
            v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            params[i] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        }
    }
}
