use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::im2col::{col2im, im2col, ConvGeom};
use super::{Layer, Mode, Slot};
use crate::error::{NnError, Result};
use crate::scalar::{matmul, Mat, Scalar};
use crate::tensor::Tensor;

/// Transposed convolution, weight layout `[in, out, k, k]`.
///
/// Output size is `(h - 1) * stride - 2 * pad + k`; with `k = 4, stride = 2,
/// pad = 1` this doubles the spatial resolution.
#[derive(Debug, Clone)]
pub struct ConvTranspose2d<T> {
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
    pub stride: usize,
    pub pad: usize,
    cache: Option<Tensor<T>>,
}

impl<T: Scalar> ConvTranspose2d<T> {
    pub fn new<R: Rng>(
        in_ch: usize,
        out_ch: usize,
        k: usize,
        stride: usize,
        pad: usize,
        rng: &mut R,
    ) -> Self {
        // fan-in seen by each output pixel
        let fan_in = (in_ch * k * k) as f64 / (stride * stride) as f64;
        let normal = Normal::new(0.0, (2.0 / fan_in).sqrt()).expect("valid std");
        let w = (0..in_ch * out_ch * k * k)
            .map(|_| T::from_f64_lossy(normal.sample(rng)))
            .collect();
        ConvTranspose2d {
            weight: Tensor::param(&[in_ch, out_ch, k, k], w).expect("consistent shape"),
            bias: Tensor::param(&[out_ch], vec![T::zero(); out_ch]).expect("consistent shape"),
            stride,
            pad,
            cache: None,
        }
    }

    fn dims(&self) -> (usize, usize, usize) {
        let s = self.weight.shape();
        (s[0], s[1], s[2])
    }

    /// The convolution whose input gradient this layer computes.
    fn geom(&self, h: usize, w: usize) -> ConvGeom {
        let (_, out_ch, k) = self.dims();
        ConvGeom {
            c: out_ch,
            h: (h - 1) * self.stride + k - 2 * self.pad,
            w: (w - 1) * self.stride + k - 2 * self.pad,
            k,
            stride: self.stride,
            pad: self.pad,
        }
    }
}

impl<T: Scalar> Layer<T> for ConvTranspose2d<T> {
    fn name(&self) -> &'static str {
        "conv_transpose2d"
    }

    fn forward(&mut self, x: &Tensor<T>, _mode: Mode) -> Result<Tensor<T>> {
        let (n, c, h, w) = x.nchw()?;
        let (in_ch, out_ch, _) = self.dims();
        if c != in_ch {
            return Err(NnError::Shape { expected: vec![n, in_ch, h, w], got: x.shape().to_vec() });
        }
        let g = self.geom(h, w);
        debug_assert_eq!(g.out_hw(), (h, w));
        let kr = g.col_rows();
        let hw = h * w;
        let mut cols = vec![T::zero(); kr * hw];
        let out_len = out_ch * g.h * g.w;
        let mut out = Tensor::zeros(&[n, out_ch, g.h, g.w]);
        for i in 0..n {
            let xi = &x.data[i * c * hw..(i + 1) * c * hw];
            matmul(Mat::new(&self.weight.data, in_ch, kr).t(), Mat::new(xi, in_ch, hw), T::zero(), &mut cols);
            let dst = &mut out.data[i * out_len..(i + 1) * out_len];
            col2im(&g, &cols, dst);
            for (o, plane) in dst.chunks_mut(g.h * g.w).enumerate() {
                let b = self.bias.data[o];
                plane.iter_mut().for_each(|v| *v = *v + b);
            }
        }
        self.cache = Some(x.clone());
        Ok(out)
    }

    fn backward(&mut self, grad: &Tensor<T>) -> Result<Tensor<T>> {
        let x = self.cache.as_ref().ok_or(NnError::NoForward("conv_transpose2d"))?;
        let (n, c, h, w) = x.nchw()?;
        let (in_ch, out_ch, _) = self.dims();
        let g = self.geom(h, w);
        grad.expect_shape(&[n, out_ch, g.h, g.w])?;
        let kr = g.col_rows();
        let hw = h * w;
        let out_len = out_ch * g.h * g.w;
        let mut dcols = vec![T::zero(); kr * hw];
        let mut dx = Tensor::zeros(&[n, c, h, w]);
        let wgrad = self.weight.grad.get_or_insert_with(|| vec![T::zero(); in_ch * kr]);
        let bgrad = self.bias.grad.get_or_insert_with(|| vec![T::zero(); out_ch]);
        for i in 0..n {
            let dout = &grad.data[i * out_len..(i + 1) * out_len];
            for (o, plane) in dout.chunks(g.h * g.w).enumerate() {
                bgrad[o] = bgrad[o] + plane.iter().copied().sum::<T>();
            }
            im2col(&g, dout, &mut dcols);
            let xi = &x.data[i * c * hw..(i + 1) * c * hw];
            matmul(Mat::new(xi, in_ch, hw), Mat::new(&dcols, kr, hw).t(), T::one(), wgrad);
            matmul(
                Mat::new(&self.weight.data, in_ch, kr),
                Mat::new(&dcols, kr, hw),
                T::zero(),
                &mut dx.data[i * c * hw..(i + 1) * c * hw],
            );
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
