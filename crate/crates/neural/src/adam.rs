use serde::{Deserialize, Serialize};

use crate::params::{raw_mut, tape_raw, GradTape, NetConfig, Params, Tensor};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 1e-4, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// Moment buffers of the Adam optimizer.
#[derive(Debug, Clone)]
pub struct Adam<T> {
    pub cfg: AdamConfig,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
    step: u64,
}

impl<T: Real> Adam<T> {
    pub fn new(net: &NetConfig, cfg: AdamConfig) -> Self {
        let zeros: Vec<Vec<T>> = Tensor::ALL
            .iter()
            .map(|t| {
                let (r, c) = t.shape(net);
                vec![T::zero(); r * c]
            })
            .collect();
        Self { cfg, m: zeros.clone(), v: zeros, step: 0 }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// One bias-corrected update of every trainable tensor.
    pub fn step(&mut self, params: &mut Params<T>, grads: &GradTape<T>) {
        self.step += 1;
        let (b1, b2) = (T::lit(self.cfg.beta1), T::lit(self.cfg.beta2));
        let lr = T::lit(self.cfg.lr);
        let eps = T::lit(self.cfg.eps);
        let c1 = T::one() - b1.powi(self.step as i32);
        let c2 = T::one() - b2.powi(self.step as i32);
        let data = raw_mut(params);
        for (((p, g), m), v) in data.iter_mut().zip(tape_raw(grads)).zip(&mut self.m).zip(&mut self.v) {
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (T::one() - b1) * g[i];
                v[i] = b2 * v[i] + (T::one() - b2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] = p[i] - lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
    }
}
