//! Differentiable layers with explicit, cached backward passes.
//!
//! Each layer caches what its backward pass needs during `forward`; calling
//! `backward` without a preceding `forward` is an error. Parameter gradients
//! accumulate until `zero_grad`.

mod batchnorm;
mod conv;
mod im2col;
mod linear;
mod relu;
mod tconv;

pub use batchnorm::BatchNorm2d;
pub use conv::Conv2d;
pub use linear::Linear;
pub use relu::Relu;
pub use tconv::ConvTranspose2d;

use crate::error::Result;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Whether a tensor is optimized or only carried as state (running statistics).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Param,
    Buffer,
}

pub trait Layer<T: Scalar> {
    fn name(&self) -> &'static str;

    fn forward(&mut self, x: &Tensor<T>, mode: Mode) -> Result<Tensor<T>>;

    /// Propagate `grad` (dL/d output) back, accumulating parameter gradients
    /// and returning dL/d input.
    fn backward(&mut self, grad: &Tensor<T>) -> Result<Tensor<T>>;

    fn visit_mut(&mut self, _f: &mut dyn FnMut(&str, Slot, &mut Tensor<T>)) {}

    fn visit(&self, _f: &mut dyn FnMut(&str, Slot, &Tensor<T>)) {}
}

/// Elementwise sum of two equally shaped tensors (skip and shortcut connections).
pub fn add<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    b.expect_shape(a.shape())?;
    let data = a.data.iter().zip(&b.data).map(|(&x, &y)| x + y).collect();
    Tensor::from_vec(a.shape(), data)
}

pub(crate) fn add_assign<T: Scalar>(a: &mut Tensor<T>, b: &Tensor<T>) -> Result<()> {
    b.expect_shape(a.shape())?;
    a.data.iter_mut().zip(&b.data).for_each(|(x, &y)| *x = *x + y);
    Ok(())
}
