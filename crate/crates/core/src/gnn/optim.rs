use ndarray::{Array2, Zip};

use super::ModelParams;
use crate::num::lit;
use crate::{Error, Real, Result};

/// AdamW with decoupled weight decay, applied before the adaptive step.
#[derive(Clone, Debug)]
pub struct AdamW<T> {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    step: i32,
    m: Vec<Array2<T>>,
    v: Vec<Array2<T>>,
}

impl<T: Real> AdamW<T> {
    pub fn new(lr: f64, weight_decay: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay,
            step: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    pub fn steps(&self) -> i32 {
        self.step
    }

    /// Updates `params` in place. Non-finite gradients abort before any change.
    pub fn step(&mut self, params: &mut ModelParams<T>, grads: &ModelParams<T>) -> Result<()> {
        let grads = grads.tensors();
        if let Some((name, _)) = grads.iter().find(|(_, g)| g.iter().any(|x| !x.is_finite())) {
            return Err(Error::NonFiniteGradient((*name).to_owned()));
        }
        if self.m.is_empty() {
            self.m = grads.iter().map(|(_, g)| Array2::zeros(g.raw_dim())).collect();
            self.v = self.m.clone();
        }
        self.step += 1;
        let (b1, b2): (T, T) = (lit(self.beta1), lit(self.beta2));
        let bc1: T = lit(1.0 - self.beta1.powi(self.step));
        let bc2: T = lit(1.0 - self.beta2.powi(self.step));
        let lr: T = lit(self.lr);
        let decay: T = lit(1.0 - self.lr * self.weight_decay);
        let eps: T = lit(self.eps);
        for (k, (_, theta)) in params.tensors_mut().into_iter().enumerate() {
            Zip::from(theta)
                .and(grads[k].1)
                .and(&mut self.m[k])
                .and(&mut self.v[k])
                .for_each(|t, &g, m, v| {
                    *t = *t * decay;
                    *m = b1 * *m + (T::one() - b1) * g;
                    *v = b2 * *v + (T::one() - b2) * g * g;
                    let mh = *m / bc1;
                    let vh = *v / bc2;
                    *t -= lr * mh / (vh.sqrt() + eps);
                });
        }
        Ok(())
    }
}
