use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::layers::{Layer, Linear, Mode, Relu, Slot};
use crate::module::{visit_child, visit_child_mut, Module};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Bias-free multilayer perceptron with ReLU between layers and linear logits.
///
/// Without biases an all-zero input maps to all-zero logits, i.e. a uniform
/// softmax.
#[derive(Debug, Clone)]
pub struct Mlp<T> {
    pub layers: Vec<Linear<T>>,
    relus: Vec<Relu>,
}

impl<T: Scalar> Mlp<T> {
    /// `sizes = [input, hidden.., output]`.
    pub fn new(sizes: &[usize], seed: u64) -> Self {
        assert!(sizes.len() >= 2, "need at least input and output sizes");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers: Vec<Linear<T>> = sizes
            .windows(2)
            .map(|w| Linear::new(w[0], w[1], false, &mut rng))
            .collect();
        let relus = (1..layers.len()).map(|_| Relu::new()).collect();
        Mlp { layers, relus }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weight.shape()[1]
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").weight.shape()[0]
    }

    pub fn forward(&mut self, x: &Tensor<T>, mode: Mode) -> Result<Tensor<T>> {
        let mut h = x.clone();
        for (i, layer) in self.layers.iter_mut().enumerate() {
            h = layer.forward(&h, mode)?;
            if i < self.relus.len() {
                h = self.relus[i].forward(&h, mode)?;
            }
        }
        Ok(h)
    }

    pub fn backward(&mut self, grad: &Tensor<T>) -> Result<Tensor<T>> {
        let mut g = grad.clone();
        for i in (0..self.layers.len()).rev() {
            if i < self.relus.len() {
                g = Layer::<T>::backward(&mut self.relus[i], &g)?;
            }
            g = self.layers[i].backward(&g)?;
        }
        Ok(g)
    }

    /// Logits for a batch, without touching the caches of `self`.
    pub fn logits(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        self.clone().forward(x, Mode::Eval)
    }
}

impl<T: Scalar> Module<T> for Mlp<T> {
    fn visit_mut(&mut self, f: &mut dyn FnMut(&str, Slot, &mut Tensor<T>)) {
        for (i, l) in self.layers.iter_mut().enumerate() {
            visit_child_mut(&format!("fc{i}"), l, f);
        }
    }

    fn visit(&self, f: &mut dyn FnMut(&str, Slot, &Tensor<T>)) {
        for (i, l) in self.layers.iter().enumerate() {
            visit_child(&format!("fc{i}"), l, f);
        }
    }
}
