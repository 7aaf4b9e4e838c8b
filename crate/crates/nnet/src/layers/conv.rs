use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::im2col::{col2im, im2col, ConvGeom};
use super::{Layer, Mode, Slot};
use crate::error::{NnError, Result};
use crate::scalar::{matmul, Mat, Scalar};
use crate::tensor::Tensor;

/// 2-D convolution, square kernel, weight layout `[out, in, k, k]`.
#[derive(Debug, Clone)]
pub struct Conv2d<T> {
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
    pub stride: usize,
    pub pad: usize,
    cache: Option<Cache<T>>,
}

#[derive(Debug, Clone)]
struct Cache<T> {
    cols: Vec<T>,
    n: usize,
    geom: ConvGeom,
}

impl<T: Scalar> Conv2d<T> {
    /// He-normal initialized weights, zero bias.
    pub fn new<R: Rng>(
        in_ch: usize,
        out_ch: usize,
        k: usize,
        stride: usize,
        pad: usize,
        rng: &mut R,
    ) -> Self {
        let fan_in = (in_ch * k * k) as f64;
        let normal = Normal::new(0.0, (2.0 / fan_in).sqrt()).expect("valid std");
        let w = (0..out_ch * in_ch * k * k)
            .map(|_| T::from_f64_lossy(normal.sample(rng)))
            .collect();
        Self::from_parts(in_ch, out_ch, k, stride, pad, w, vec![T::zero(); out_ch])
    }

    pub fn zeros(in_ch: usize, out_ch: usize, k: usize, stride: usize, pad: usize) -> Self {
        let w = vec![T::zero(); out_ch * in_ch * k * k];
        Self::from_parts(in_ch, out_ch, k, stride, pad, w, vec![T::zero(); out_ch])
    }

    fn from_parts(
        in_ch: usize,
        out_ch: usize,
        k: usize,
        stride: usize,
        pad: usize,
        w: Vec<T>,
        b: Vec<T>,
    ) -> Self {
        Conv2d {
            weight: Tensor::param(&[out_ch, in_ch, k, k], w).expect("consistent shape"),
            bias: Tensor::param(&[out_ch], b).expect("consistent shape"),
            stride,
            pad,
            cache: None,
        }
    }

    fn dims(&self) -> (usize, usize, usize) {
        let s = self.weight.shape();
        (s[0], s[1], s[2])
    }
}

impl<T: Scalar> Layer<T> for Conv2d<T> {
    fn name(&self) -> &'static str {
        "conv2d"
    }

    fn forward(&mut self, x: &Tensor<T>, _mode: Mode) -> Result<Tensor<T>> {
        let (n, c, h, w) = x.nchw()?;
        let (out_ch, in_ch, k) = self.dims();
        if c != in_ch {
            return Err(NnError::Shape { expected: vec![n, in_ch, h, w], got: x.shape().to_vec() });
        }
        let geom = ConvGeom { c, h, w, k, stride: self.stride, pad: self.pad };
        let (ho, wo) = geom.out_hw();
        let (kr, p) = (geom.col_rows(), geom.col_cols());
        let mut cols = vec![T::zero(); n * kr * p];
        let mut out = Tensor::zeros(&[n, out_ch, ho, wo]);
        let sample = c * h * w;
        for i in 0..n {
            let col = &mut cols[i * kr * p..(i + 1) * kr * p];
            im2col(&geom, &x.data[i * sample..(i + 1) * sample], col);
            let dst = &mut out.data[i * out_ch * p..(i + 1) * out_ch * p];
            for (o, row) in dst.chunks_mut(p).enumerate() {
                row.iter_mut().for_each(|v| *v = self.bias.data[o]);
            }
            matmul(Mat::new(&self.weight.data, out_ch, kr), Mat::new(col, kr, p), T::one(), dst);
        }
        self.cache = Some(Cache { cols, n, geom });
        Ok(out)
    }

    fn backward(&mut self, grad: &Tensor<T>) -> Result<Tensor<T>> {
        let cache = self.cache.as_ref().ok_or(NnError::NoForward("conv2d"))?;
        let (out_ch, _, _) = self.dims();
        let g = cache.geom;
        let (ho, wo) = g.out_hw();
        grad.expect_shape(&[cache.n, out_ch, ho, wo])?;
        let (kr, p) = (g.col_rows(), g.col_cols());
        let mut dx = Tensor::zeros(&[cache.n, g.c, g.h, g.w]);
        let mut dcols = vec![T::zero(); kr * p];
        let sample = g.c * g.h * g.w;
        let wgrad = self.weight.grad.get_or_insert_with(|| vec![T::zero(); out_ch * kr]);
        let bgrad = self.bias.grad.get_or_insert_with(|| vec![T::zero(); out_ch]);
        for i in 0..cache.n {
            let dout = &grad.data[i * out_ch * p..(i + 1) * out_ch * p];
            let col = &cache.cols[i * kr * p..(i + 1) * kr * p];
            for (o, row) in dout.chunks(p).enumerate() {
                bgrad[o] = bgrad[o] + row.iter().copied().sum::<T>();
            }
            matmul(Mat::new(dout, out_ch, p), Mat::new(col, kr, p).t(), T::one(), wgrad);
            matmul(Mat::new(&self.weight.data, out_ch, kr).t(), Mat::new(dout, out_ch, p), T::zero(), &mut dcols);
            col2im(&g, &dcols, &mut dx.data[i * sample..(i + 1) * sample]);
        }
        Ok(dx)
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&str, Slot, &mut Tensor<T>)) {
        f("weight", Slot::Param, &mut self.weight);
        f("bias", Slot::Param, &mut self.bias);
    }

    fn visit(&self, f: &mut dyn FnMut(&str, Slot, &Tensor<T>)) {
        f("weight", Slot::Param, &self.weight);
        f("bias", Slot::Param, &self.bias);
    }
}
