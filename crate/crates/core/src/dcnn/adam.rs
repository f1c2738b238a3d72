use serde::{Deserialize, Serialize};

use super::{Gradients, Network, Scalar};

/// Adam hyperparameters; defaults are the usual `lr = 1e-3, β1 = 0.9,
/// β2 = 0.999, ε = 1e-8`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<S> {
    pub config: AdamConfig,
    pub step: u64,
    pub m: Gradients<S>,
    pub v: Gradients<S>,
}

impl<S: Scalar> AdamState<S> {
    pub fn new(net: &Network<S>, config: AdamConfig) -> Self {
        Self {
            config,
            step: 0,
            m: Gradients::zeros_like(net),
            v: Gradients::zeros_like(net),
        }
    }

    /// One bias-corrected Adam update of every parameter of `net`.
    pub fn step(&mut self, net: &mut Network<S>, grads: &Gradients<S>) {
        self.step += 1;
        let c = self.config;
        let t = self.step as i32;
        let b1 = S::from_f64(c.beta1);
        let b2 = S::from_f64(c.beta2);
        let one_b1 = S::from_f64(1.0 - c.beta1);
        let one_b2 = S::from_f64(1.0 - c.beta2);
        let corr1 = S::from_f64(1.0 / (1.0 - c.beta1.powi(t)));
        let corr2 = S::from_f64(1.0 / (1.0 - c.beta2.powi(t)));
        let lr = S::from_f64(c.lr);
        let eps = S::from_f64(c.eps);

        let update = |params: &mut [S], g: &[S], m: &mut [S], v: &mut [S]| {
            for (((p, &g), m), v) in params.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
                *m = b1 * *m + one_b1 * g;
                *v = b2 * *v + one_b2 * g * g;
                let m_hat = *m * corr1;
                let v_hat = *v * corr2;
                *p = *p - lr * m_hat / (v_hat.sqrt() + eps);
            }
        };

        for (i, layer) in net.layers.iter_mut().enumerate() {
            update(&mut layer.weights, &grads.weights[i], &mut self.m.weights[i], &mut self.v.weights[i]);
            update(&mut layer.bias, &grads.bias[i], &mut self.m.bias[i], &mut self.v.bias[i]);
        }
    }
}
