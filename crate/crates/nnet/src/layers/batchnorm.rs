use super::{Layer, Mode, Slot};
use crate::error::{NnError, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Per-channel batch normalization over `(n, h, w)`.
///
/// Training mode normalizes with batch statistics and updates the running
/// estimates (`running = (1 - momentum) * running + momentum * batch`, with
/// the unbiased batch variance). Eval mode uses the running estimates only.
#[derive(Debug, Clone)]
pub struct BatchNorm2d<T> {
    pub gamma: Tensor<T>,
    pub beta: Tensor<T>,
    pub running_mean: Tensor<T>,
    pub running_var: Tensor<T>,
    pub momentum: f64,
    pub eps: f64,
    cache: Option<Cache<T>>,
}

#[derive(Debug, Clone)]
struct Cache<T> {
    xhat: Vec<T>,
    inv_std: Vec<T>,
    shape: Vec<usize>,
    mode: Mode,
}

impl<T: Scalar> BatchNorm2d<T> {
    pub fn new(channels: usize) -> Self {
        BatchNorm2d {
            gamma: Tensor::param(&[channels], vec![T::one(); channels]).expect("shape"),
            beta: Tensor::param(&[channels], vec![T::zero(); channels]).expect("shape"),
            running_mean: Tensor::zeros(&[channels]),
            running_var: Tensor::from_vec(&[channels], vec![T::one(); channels]).expect("shape"),
            momentum: 0.1,
            eps: 1e-5,
            cache: None,
        }
    }

    fn channels(&self) -> usize {
        self.gamma.len()
    }
}

impl<T: Scalar> Layer<T> for BatchNorm2d<T> {
    fn name(&self) -> &'static str {
        "batchnorm2d"
    }

    fn forward(&mut self, x: &Tensor<T>, mode: Mode) -> Result<Tensor<T>> {
        let (n, c, h, w) = x.nchw()?;
        if c != self.channels() {
            return Err(NnError::Shape { expected: vec![n, self.channels(), h, w], got: x.shape().to_vec() });
        }
        let hw = h * w;
        let count = n * hw;
        let eps = T::from_f64_lossy(self.eps);
        let mut xhat = vec![T::zero(); x.len()];
        let mut inv_std = vec![T::zero(); c];
        let mut out = Tensor::zeros(x.shape());
        for ch in 0..c {
            let planes = (0..n).map(|i| (i * c + ch) * hw);
            let (mean, var) = match mode {
                Mode::Train => {
                    let cnt = T::from_usize(count).expect("count");
                    let mean = planes
                        .clone()
                        .map(|o| x.data[o..o + hw].iter().copied().sum::<T>())
                        .sum::<T>()
                        / cnt;
                    let var = planes
                        .clone()
                        .map(|o| x.data[o..o + hw].iter().map(|&v| (v - mean) * (v - mean)).sum::<T>())
                        .sum::<T>()
                        / cnt;
                    let m = T::from_f64_lossy(self.momentum);
                    let unbiased = if count > 1 {
                        var * cnt / T::from_usize(count - 1).expect("count")
                    } else {
                        var
                    };
                    self.running_mean.data[ch] = (T::one() - m) * self.running_mean.data[ch] + m * mean;
                    self.running_var.data[ch] = (T::one() - m) * self.running_var.data[ch] + m * unbiased;
                    (mean, var)
                }
                Mode::Eval => (self.running_mean.data[ch], self.running_var.data[ch]),
            };
            let is = T::one() / (var + eps).sqrt();
            inv_std[ch] = is;
            let (g, b) = (self.gamma.data[ch], self.beta.data[ch]);
            for o in planes {
                for k in o..o + hw {
                    let xh = (x.data[k] - mean) * is;
                    xhat[k] = xh;
                    out.data[k] = g * xh + b;
                }
            }
        }
        self.cache = Some(Cache { xhat, inv_std, shape: x.shape().to_vec(), mode });
        Ok(out)
    }

    fn backward(&mut self, grad: &Tensor<T>) -> Result<Tensor<T>> {
        let cache = self.cache.as_ref().ok_or(NnError::NoForward("batchnorm2d"))?;
        grad.expect_shape(&cache.shape)?;
        let (n, c, h, w) = grad.nchw()?;
        let hw = h * w;
        let cnt = T::from_usize(n * hw).expect("count");
        let mut dx = Tensor::zeros(&cache.shape);
        let ggrad = self.gamma.grad.get_or_insert_with(|| vec![T::zero(); c]);
        let bgrad = self.beta.grad.get_or_insert_with(|| vec![T::zero(); c]);
        for ch in 0..c {
            let planes = (0..n).map(|i| (i * c + ch) * hw);
            let mut sum_dy = T::zero();
            let mut sum_dy_xhat = T::zero();
            for o in planes.clone() {
                for k in o..o + hw {
                    sum_dy = sum_dy + grad.data[k];
                    sum_dy_xhat = sum_dy_xhat + grad.data[k] * cache.xhat[k];
                }
            }
            ggrad[ch] = ggrad[ch] + sum_dy_xhat;
            bgrad[ch] = bgrad[ch] + sum_dy;
            let scale = self.gamma.data[ch] * cache.inv_std[ch];
            for o in planes {
                for k in o..o + hw {
                    dx.data[k] = match cache.mode {
                        Mode::Train => {
                            scale * (grad.data[k] - sum_dy / cnt - cache.xhat[k] * sum_dy_xhat / cnt)
                        }
                        Mode::Eval => scale * grad.data[k],
                    };
                }
            }
        }
        Ok(dx)
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&str, Slot, &mut Tensor<T>)) {
        f("gamma", Slot::Param, &mut self.gamma);
        f("beta", Slot::Param, &mut self.beta);
        f("running_mean", Slot::Buffer, &mut self.running_mean);
        f("running_var", Slot::Buffer, &mut self.running_var);
    }

    fn visit(&self, f: &mut dyn FnMut(&str, Slot, &Tensor<T>)) {
        f("gamma", Slot::Param, &self.gamma);
        f("beta", Slot::Param, &self.beta);
        f("running_mean", Slot::Buffer, &self.running_mean);
        f("running_var", Slot::Buffer, &self.running_var);
    }
}
