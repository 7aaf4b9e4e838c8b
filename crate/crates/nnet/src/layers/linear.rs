use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{Layer, Mode, Slot};
use crate::error::{NnError, Result};
use crate::scalar::{matmul, Mat, Scalar};
use crate::tensor::Tensor;

/// Fully connected layer over `[n, in]` inputs; weight layout `[out, in]`.
#[derive(Debug, Clone)]
pub struct Linear<T> {
    pub weight: Tensor<T>,
    pub bias: Option<Tensor<T>>,
    cache: Option<Tensor<T>>,
}

impl<T: Scalar> Linear<T> {
    pub fn new<R: Rng>(input: usize, output: usize, with_bias: bool, rng: &mut R) -> Self {
        let normal = Normal::new(0.0, (2.0 / input as f64).sqrt()).expect("valid std");
        let w = (0..input * output).map(|_| T::from_f64_lossy(normal.sample(rng))).collect();
        Linear {
            weight: Tensor::param(&[output, input], w).expect("shape"),
            bias: with_bias.then(|| Tensor::param(&[output], vec![T::zero(); output]).expect("shape")),
            cache: None,
        }
    }

    fn dims(&self) -> (usize, usize) {
        (self.weight.shape()[0], self.weight.shape()[1])
    }
}

impl<T: Scalar> Layer<T> for Linear<T> {
    fn name(&self) -> &'static str {
        "linear"
    }

    fn forward(&mut self, x: &Tensor<T>, _mode: Mode) -> Result<Tensor<T>> {
        let (out_dim, in_dim) = self.dims();
        let n = match x.shape() {
            [n, d] if *d == in_dim => *n,
            _ => return Err(NnError::Shape { expected: vec![0, in_dim], got: x.shape().to_vec() }),
        };
        let mut out = Tensor::zeros(&[n, out_dim]);
        if let Some(b) = &self.bias {
            for row in out.data.chunks_mut(out_dim) {
                row.copy_from_slice(&b.data);
            }
        }
        matmul(Mat::new(&x.data, n, in_dim), Mat::new(&self.weight.data, out_dim, in_dim).t(), T::one(), &mut out.data);
        self.cache = Some(x.clone());
        Ok(out)
    }

    fn backward(&mut self, grad: &Tensor<T>) -> Result<Tensor<T>> {
        let x = self.cache.as_ref().ok_or(NnError::NoForward("linear"))?;
        let (out_dim, in_dim) = self.dims();
        let n = x.shape()[0];
        grad.expect_shape(&[n, out_dim])?;
        let wgrad = self.weight.grad.get_or_insert_with(|| vec![T::zero(); out_dim * in_dim]);
        matmul(Mat::new(&grad.data, n, out_dim).t(), Mat::new(&x.data, n, in_dim), T::one(), wgrad);
        if let Some(b) = self.bias.as_mut() {
            let bgrad = b.grad_mut();
            for row in grad.data.chunks(out_dim) {
                bgrad.iter_mut().zip(row).for_each(|(g, &v)| *g = *g + v);
            }
        }
        let mut dx = Tensor::zeros(&[n, in_dim]);
        matmul(Mat::new(&grad.data, n, out_dim), Mat::new(&self.weight.data, out_dim, in_dim), T::zero(), &mut dx.data);
        Ok(dx)
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&str, Slot, &mut Tensor<T>)) {
        f("weight", Slot::Param, &mut self.weight);
        if let Some(b) = self.bias.as_mut() {
            f("bias", Slot::Param, b);
        }
    }

    fn visit(&self, f: &mut dyn FnMut(&str, Slot, &Tensor<T>)) {
        f("weight", Slot::Param, &self.weight);
        if let Some(b) = &self.bias {
            f("bias", Slot::Param, b);
        }
    }
}
