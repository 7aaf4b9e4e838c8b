use serde::{Deserialize, Serialize};

use crate::layers::Slot;
use crate::module::Module;
use crate::scalar::Scalar;

/// SGD with classical momentum: `v = momentum * v + (g + wd * p)`, `p -= lr * v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub lr: f64,
    pub momentum: f64,
    pub weight_decay: f64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        SgdConfig { lr: 1e-3, momentum: 0.9, weight_decay: 0.0 }
    }
}

#[derive(Debug, Clone)]
pub struct Sgd<T> {
    pub config: SgdConfig,
    velocity: Vec<Vec<T>>,
}

impl<T: Scalar> Sgd<T> {
    pub fn new(config: SgdConfig) -> Self {
        Sgd { config, velocity: Vec::new() }
    }

    pub fn step<M: Module<T> + ?Sized>(&mut self, model: &mut M) {
        let lr = T::from_f64_lossy(self.config.lr);
        let mu = T::from_f64_lossy(self.config.momentum);
        let wd = T::from_f64_lossy(self.config.weight_decay);
        let velocity = &mut self.velocity;
        let mut idx = 0;
        model.visit_mut(&mut |_, slot, t| {
            if slot != Slot::Param {
                return;
            }
            if velocity.len() <= idx {
                velocity.push(vec![T::zero(); t.len()]);
            }
            let v = &mut velocity[idx];
            let grad = t.grad.take().unwrap_or_else(|| vec![T::zero(); t.data.len()]);
            for ((p, g), vel) in t.data.iter_mut().zip(&grad).zip(v.iter_mut()) {
                *vel = mu * *vel + *g + wd * *p;
                *p = *p - lr * *vel;
            }
            t.grad = Some(grad);
            idx += 1;
        });
    }
}

/// Adam with bias-corrected moments and L2 weight decay folded into the gradient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8, weight_decay: 0.0 }
    }
}

#[derive(Debug, Clone)]
pub struct Adam<T> {
    pub config: AdamConfig,
    step: u32,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(config: AdamConfig) -> Self {
        Adam { config, step: 0, m: Vec::new(), v: Vec::new() }
    }

    pub fn step<M: Module<T> + ?Sized>(&mut self, model: &mut M) {
        self.step += 1;
        let c = self.config;
        let b1 = T::from_f64_lossy(c.beta1);
        let b2 = T::from_f64_lossy(c.beta2);
        let eps = T::from_f64_lossy(c.eps);
        let wd = T::from_f64_lossy(c.weight_decay);
        let step_size = T::from_f64_lossy(c.lr / (1.0 - c.beta1.powi(self.step as i32)));
        let v_corr = T::from_f64_lossy(1.0 / (1.0 - c.beta2.powi(self.step as i32)));
        let (ms, vs) = (&mut self.m, &mut self.v);
        let mut idx = 0;
        model.visit_mut(&mut |_, slot, t| {
            if slot != Slot::Param {
                return;
            }
            if ms.len() <= idx {
                ms.push(vec![T::zero(); t.len()]);
                vs.push(vec![T::zero(); t.len()]);
            }
            let grad = t.grad.take().unwrap_or_else(|| vec![T::zero(); t.data.len()]);
            for (((p, &g), m), v) in t.data.iter_mut().zip(&grad).zip(ms[idx].iter_mut()).zip(vs[idx].iter_mut()) {
                let g = g + wd * *p;
                *m = b1 * *m + (T::one() - b1) * g;
                *v = b2 * *v + (T::one() - b2) * g * g;
                *p = *p - step_size * *m / ((*v * v_corr).sqrt() + eps);
            }
            t.grad = Some(grad);
            idx += 1;
        });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerConfig {
    Sgd(SgdConfig),
    Adam(AdamConfig),
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig::Sgd(SgdConfig::default())
    }
}

impl OptimizerConfig {
    pub fn lr(&self) -> f64 {
        match self {
            OptimizerConfig::Sgd(c) => c.lr,
            OptimizerConfig::Adam(c) => c.lr,
        }
    }

    pub fn build<T: Scalar>(&self) -> Optimizer<T> {
        match *self {
            OptimizerConfig::Sgd(c) => Optimizer::Sgd(Sgd::new(c)),
            OptimizerConfig::Adam(c) => Optimizer::Adam(Adam::new(c)),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Optimizer<T> {
    Sgd(Sgd<T>),
    Adam(Adam<T>),
}

impl<T: Scalar> Optimizer<T> {
    pub fn step<M: Module<T> + ?Sized>(&mut self, model: &mut M) {
        match self {
            Optimizer::Sgd(o) => o.step(model),
            Optimizer::Adam(o) => o.step(model),
        }
    }
}
