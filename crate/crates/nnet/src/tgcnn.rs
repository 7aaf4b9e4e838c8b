//! The pixel-wise grasp network.
//!
//! ```text
//! image 3xHxW
//!   conv 9x9/2 -> relu                     e1: c1 x H/2
//!   conv 5x5/2 -> relu                     e2: c2 x H/4
//!   residual block x N                     b:  c2 x H/4
//!   tconv 4x4/2 -> relu, + e1              d1: c1 x H/2
//!   tconv 4x4/2 -> relu                    d2: c3 x H
//!   1x1 conv -> Q,  1x1 conv -> R          2 x H x W (linear)
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NnError, Result};
use crate::layers::{add, add_assign, BatchNorm2d, Conv2d, ConvTranspose2d, Layer, Mode, Relu, Slot};
use crate::module::{visit_child, visit_child_mut, Module};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TgcnnConfig {
    pub enc1: usize,
    pub enc2: usize,
    pub dec2: usize,
    pub blocks: usize,
}

impl Default for TgcnnConfig {
    fn default() -> Self {
        TgcnnConfig { enc1: 16, enc2: 32, dec2: 8, blocks: 3 }
    }
}

/// conv-bn-relu-conv-bn, plus identity shortcut, then relu.
#[derive(Debug, Clone)]
pub struct ResidualBlock<T> {
    pub conv1: Conv2d<T>,
    pub bn1: BatchNorm2d<T>,
    relu1: Relu,
    pub conv2: Conv2d<T>,
    pub bn2: BatchNorm2d<T>,
    relu_out: Relu,
}

impl<T: Scalar> ResidualBlock<T> {
    pub fn new<R: rand::Rng>(ch: usize, rng: &mut R) -> Self {
        ResidualBlock {
            conv1: Conv2d::new(ch, ch, 3, 1, 1, rng),
            bn1: BatchNorm2d::new(ch),
            relu1: Relu::new(),
            conv2: Conv2d::new(ch, ch, 3, 1, 1, rng),
            bn2: BatchNorm2d::new(ch),
            relu_out: Relu::new(),
        }
    }
}

impl<T: Scalar> Layer<T> for ResidualBlock<T> {
    fn name(&self) -> &'static str {
        "residual_block"
    }

    fn forward(&mut self, x: &Tensor<T>, mode: Mode) -> Result<Tensor<T>> {
        let f = self.conv1.forward(x, mode)?;
        let f = self.bn1.forward(&f, mode)?;
        let f = self.relu1.forward(&f, mode)?;
        let f = self.conv2.forward(&f, mode)?;
        let f = self.bn2.forward(&f, mode)?;
        self.relu_out.forward(&add(&f, x)?, mode)
    }

    fn backward(&mut self, grad: &Tensor<T>) -> Result<Tensor<T>> {
        let g_sum = Layer::<T>::backward(&mut self.relu_out, grad)?;
        let g = self.bn2.backward(&g_sum)?;
        let g = self.conv2.backward(&g)?;
        let g = Layer::<T>::backward(&mut self.relu1, &g)?;
        let g = self.bn1.backward(&g)?;
        let mut g = self.conv1.backward(&g)?;
        add_assign(&mut g, &g_sum)?;
        Ok(g)
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&str, Slot, &mut Tensor<T>)) {
        visit_child_mut("conv1", &mut self.conv1, f);
        visit_child_mut("bn1", &mut self.bn1, f);
        visit_child_mut("conv2", &mut self.conv2, f);
        visit_child_mut("bn2", &mut self.bn2, f);
    }

    fn visit(&self, f: &mut dyn FnMut(&str, Slot, &Tensor<T>)) {
        visit_child("conv1", &self.conv1, f);
        visit_child("bn1", &self.bn1, f);
        visit_child("conv2", &self.conv2, f);
        visit_child("bn2", &self.bn2, f);
    }
}

#[derive(Debug, Clone)]
pub struct TgcnnModel<T> {
    pub config: TgcnnConfig,
    pub enc1: Conv2d<T>,
    relu_e1: Relu,
    pub enc2: Conv2d<T>,
    relu_e2: Relu,
    pub blocks: Vec<ResidualBlock<T>>,
    pub dec1: ConvTranspose2d<T>,
    relu_d1: Relu,
    pub dec2: ConvTranspose2d<T>,
    relu_d2: Relu,
    pub head_q: Conv2d<T>,
    pub head_r: Conv2d<T>,
    forwarded: bool,
}

impl<T: Scalar> TgcnnModel<T> {
    /// Seeded initialization; the two output heads start at zero so an
    /// untrained model predicts all-zero maps.
    pub fn new(config: TgcnnConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let TgcnnConfig { enc1, enc2, dec2, blocks } = config;
        TgcnnModel {
            config,
            enc1: Conv2d::new(3, enc1, 9, 2, 4, &mut rng),
            relu_e1: Relu::new(),
            enc2: Conv2d::new(enc1, enc2, 5, 2, 2, &mut rng),
            relu_e2: Relu::new(),
            blocks: (0..blocks).map(|_| ResidualBlock::new(enc2, &mut rng)).collect(),
            dec1: ConvTranspose2d::new(enc2, enc1, 4, 2, 1, &mut rng),
            relu_d1: Relu::new(),
            dec2: ConvTranspose2d::new(enc1, dec2, 4, 2, 1, &mut rng),
            relu_d2: Relu::new(),
            head_q: Conv2d::zeros(dec2, 1, 1, 1, 0),
            head_r: Conv2d::zeros(dec2, 1, 1, 1, 0),
            forwarded: false,
        }
    }

    /// Every batch-norm layer, in forward order.
    pub fn batchnorms_mut(&mut self) -> Vec<&mut BatchNorm2d<T>> {
        self.blocks.iter_mut().flat_map(|b| [&mut b.bn1, &mut b.bn2]).collect()
    }

    /// Forward `[n, 3, h, w]` images to `[n, 2, h, w]` maps (channel 0 = Q, 1 = R).
    pub fn forward(&mut self, x: &Tensor<T>, mode: Mode) -> Result<Tensor<T>> {
        let (n, c, h, w) = x.nchw()?;
        if c != 3 {
            return Err(NnError::Shape { expected: vec![n, 3, h, w], got: x.shape().to_vec() });
        }
        if h % 4 != 0 || w % 4 != 0 || h == 0 || w == 0 {
            return Err(NnError::Indivisible { h, w, divisor: 4 });
        }
        let e1 = self.enc1.forward(x, mode)?;
        let e1 = self.relu_e1.forward(&e1, mode)?;
        let e2 = self.enc2.forward(&e1, mode)?;
        let mut b = self.relu_e2.forward(&e2, mode)?;
        for block in &mut self.blocks {
            b = block.forward(&b, mode)?;
        }
        let d1 = self.dec1.forward(&b, mode)?;
        let d1 = add(&self.relu_d1.forward(&d1, mode)?, &e1)?;
        let d2 = self.dec2.forward(&d1, mode)?;
        let d2 = self.relu_d2.forward(&d2, mode)?;
        let q = self.head_q.forward(&d2, mode)?;
        let r = self.head_r.forward(&d2, mode)?;
        self.forwarded = true;
        Ok(concat_maps(&q, &r, n, h * w))
    }

    /// Backpropagate dL/d(output maps), accumulating parameter gradients.
    pub fn backward(&mut self, grad: &Tensor<T>) -> Result<Tensor<T>> {
        if !self.forwarded {
            return Err(NnError::NoForward("tgcnn"));
        }
        let (n, c, h, w) = grad.nchw()?;
        if c != 2 {
            return Err(NnError::Shape { expected: vec![n, 2, h, w], got: grad.shape().to_vec() });
        }
        let (gq, gr) = split_maps(grad, n, h, w)?;
        let mut g = self.head_q.backward(&gq)?;
        add_assign(&mut g, &self.head_r.backward(&gr)?)?;
        let g = Layer::<T>::backward(&mut self.relu_d2, &g)?;
        let g_d1 = self.dec2.backward(&g)?;
        let g = Layer::<T>::backward(&mut self.relu_d1, &g_d1)?;
        let mut g = self.dec1.backward(&g)?;
        for block in self.blocks.iter_mut().rev() {
            g = block.backward(&g)?;
        }
        let g = Layer::<T>::backward(&mut self.relu_e2, &g)?;
        let mut g_e1 = self.enc2.backward(&g)?;
        add_assign(&mut g_e1, &g_d1)?;
        let g = Layer::<T>::backward(&mut self.relu_e1, &g_e1)?;
        self.enc1.backward(&g)
    }

    /// Eval-mode prediction for one `3 x h x w` image, returning `(Q, R)`
    /// as row-major `h * w` buffers. Runs on a scratch copy so a shared
    /// model can serve many threads.
    pub fn predict(&self, image: &Tensor<T>) -> Result<(Vec<T>, Vec<T>)> {
        let (h, w) = match image.shape() {
            [3, h, w] => (*h, *w),
            s => return Err(NnError::Shape { expected: vec![3, 0, 0], got: s.to_vec() }),
        };
        let x = image.clone().reshape(&[1, 3, h, w])?;
        let out = self.clone().forward(&x, Mode::Eval)?;
        let (q, r) = out.data.split_at(h * w);
        Ok((q.to_vec(), r.to_vec()))
    }
}

fn concat_maps<T: Scalar>(q: &Tensor<T>, r: &Tensor<T>, n: usize, hw: usize) -> Tensor<T> {
    let mut data = Vec::with_capacity(2 * n * hw);
    for i in 0..n {
        data.extend_from_slice(&q.data[i * hw..(i + 1) * hw]);
        data.extend_from_slice(&r.data[i * hw..(i + 1) * hw]);
    }
    let (h, w) = (q.shape()[2], q.shape()[3]);
    Tensor::from_vec(&[n, 2, h, w], data).expect("consistent shape")
}

fn split_maps<T: Scalar>(g: &Tensor<T>, n: usize, h: usize, w: usize) -> Result<(Tensor<T>, Tensor<T>)> {
    let hw = h * w;
    let mut q = Vec::with_capacity(n * hw);
    let mut r = Vec::with_capacity(n * hw);
    for i in 0..n {
        q.extend_from_slice(&g.data[(2 * i) * hw..(2 * i + 1) * hw]);
        r.extend_from_slice(&g.data[(2 * i + 1) * hw..(2 * i + 2) * hw]);
    }
    Ok((Tensor::from_vec(&[n, 1, h, w], q)?, Tensor::from_vec(&[n, 1, h, w], r)?))
}

impl<T: Scalar> Module<T> for TgcnnModel<T> {
    fn visit_mut(&mut self, f: &mut dyn FnMut(&str, Slot, &mut Tensor<T>)) {
        visit_child_mut("enc1", &mut self.enc1, f);
        visit_child_mut("enc2", &mut self.enc2, f);
        for (i, b) in self.blocks.iter_mut().enumerate() {
            visit_child_mut(&format!("blocks.{i}"), b, f);
        }
        visit_child_mut("dec1", &mut self.dec1, f);
        visit_child_mut("dec2", &mut self.dec2, f);
        visit_child_mut("head_q", &mut self.head_q, f);
        visit_child_mut("head_r", &mut self.head_r, f);
    }

    fn visit(&self, f: &mut dyn FnMut(&str, Slot, &Tensor<T>)) {
        visit_child("enc1", &self.enc1, f);
        visit_child("enc2", &self.enc2, f);
        for (i, b) in self.blocks.iter().enumerate() {
            visit_child(&format!("blocks.{i}"), b, f);
        }
        visit_child("dec1", &self.dec1, f);
        visit_child("dec2", &self.dec2, f);
        visit_child("head_q", &self.head_q, f);
        visit_child("head_r", &self.head_r, f);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_image_gives_zero_maps_before_training() {
        let model = TgcnnModel::<f32>::new(TgcnnConfig::default(), 3);
        let img = Tensor::zeros(&[3, 16, 16]);
        let (q, r) = model.predict(&img).unwrap();
        assert!(q.iter().chain(&r).all(|&v| v == 0.0));
    }

    #[test]
    fn output_matches_input_spatial_size() {
        let mut model = TgcnnModel::<f32>::new(TgcnnConfig::default(), 1);
        for (h, w) in [(4, 4), (8, 12), (16, 16), (32, 20), (96, 96)] {
            let x = Tensor::zeros(&[2, 3, h, w]);
            let y = model.forward(&x, Mode::Train).unwrap();
            assert_eq!(y.shape(), &[2, 2, h, w]);
        }
    }

    #[test]
    fn indivisible_input_is_rejected() {
        let mut model = TgcnnModel::<f32>::new(TgcnnConfig::default(), 1);
        let x = Tensor::zeros(&[1, 3, 10, 12]);
        assert!(matches!(model.forward(&x, Mode::Eval), Err(NnError::Indivisible { .. })));
    }

    #[test]
    fn backward_before_forward_errors() {
        let mut model = TgcnnModel::<f32>::new(TgcnnConfig::default(), 1);
        let g = Tensor::zeros(&[1, 2, 8, 8]);
        assert!(matches!(model.backward(&g), Err(NnError::NoForward(_))));
    }

    #[test]
    fn default_capacity() {
        let model = TgcnnModel::<f32>::new(TgcnnConfig::default(), 1);
        assert_eq!(model.num_params(), 82_890);
    }
}
