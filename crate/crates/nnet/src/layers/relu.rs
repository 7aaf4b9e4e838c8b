use super::{Layer, Mode};
use crate::error::{NnError, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Default)]
pub struct Relu {
    mask: Option<(Vec<bool>, Vec<usize>)>,
}

impl Relu {
    pub fn new() -> Self {
        Self::default()
    }
}

impl<T: Scalar> Layer<T> for Relu {
    fn name(&self) -> &'static str {
        "relu"
    }

    fn forward(&mut self, x: &Tensor<T>, _mode: Mode) -> Result<Tensor<T>> {
        let mask: Vec<bool> = x.data.iter().map(|&v| v > T::zero()).collect();
        let out = x.map(|v| if v > T::zero() { v } else { T::zero() });
        self.mask = Some((mask, x.shape().to_vec()));
        Ok(out)
    }

    fn backward(&mut self, grad: &Tensor<T>) -> Result<Tensor<T>> {
        let (mask, shape) = self.mask.as_ref().ok_or(NnError::NoForward("relu"))?;
        grad.expect_shape(shape)?;
        let data = grad
            .data
            .iter()
            .zip(mask)
            .map(|(&g, &m)| if m { g } else { T::zero() })
            .collect();
        Tensor::from_vec(shape, data)
    }
}
