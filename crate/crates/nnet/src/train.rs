use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NnError, Result};
use crate::layers::Mode;
use crate::loss::{huber_loss, huber_loss_grad};
use crate::module::Module;
use crate::optim::OptimizerConfig;
use crate::scalar::Scalar;
use crate::tensor::Tensor;
use crate::tgcnn::TgcnnModel;

/// One training pair: a `3 x h x w` image and its `2 x h x w` (Q, R) target.
#[derive(Debug, Clone)]
pub struct MapSample<T> {
    pub image: Tensor<T>,
    pub target: Tensor<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub optimizer: OptimizerConfig,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { optimizer: OptimizerConfig::default(), batch_size: 8, epochs: 10, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean eval-mode loss over the dataset before the first update.
    pub initial_loss: f64,
    /// Mean eval-mode loss over the dataset after the last update.
    pub final_loss: f64,
    /// Training-mode batch loss of every step.
    pub step_losses: Vec<f64>,
    pub epoch_losses: Vec<f64>,
}

impl TrainReport {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "step,loss")?;
        for (i, l) in self.step_losses.iter().enumerate() {
            writeln!(f, "{i},{l}")?;
        }
        Ok(())
    }
}

/// Stack samples `idx` into `[n, 3, h, w]` images and `[n, 2, h, w]` targets.
pub fn stack<T: Scalar>(data: &[MapSample<T>], idx: &[usize]) -> Result<(Tensor<T>, Tensor<T>)> {
    let first = &data[idx[0]];
    let (ishape, tshape) = (first.image.shape().to_vec(), first.target.shape().to_vec());
    let mut img = Vec::with_capacity(idx.len() * first.image.len());
    let mut tgt = Vec::with_capacity(idx.len() * first.target.len());
    for &i in idx {
        data[i].image.expect_shape(&ishape)?;
        data[i].target.expect_shape(&tshape)?;
        img.extend_from_slice(&data[i].image.data);
        tgt.extend_from_slice(&data[i].target.data);
    }
    let n = idx.len();
    Ok((
        Tensor::from_vec(&[n, ishape[0], ishape[1], ishape[2]], img)?,
        Tensor::from_vec(&[n, tshape[0], tshape[1], tshape[2]], tgt)?,
    ))
}

/// Mean eval-mode Huber loss over a dataset.
pub fn dataset_loss<T: Scalar>(model: &TgcnnModel<T>, data: &[MapSample<T>]) -> Result<f64> {
    let mut scratch = model.clone();
    let mut total = 0.0;
    for chunk in (0..data.len()).collect::<Vec<_>>().chunks(8) {
        let (x, y) = stack(data, chunk)?;
        let pred = scratch.forward(&x, Mode::Eval)?;
        total += huber_loss(&pred, &y)?.to_f64_lossy() * chunk.len() as f64;
    }
    Ok(total / data.len() as f64)
}

/// Replace the running batch-norm statistics with the plain average of
/// per-batch statistics over `data`. Weights are left untouched.
pub fn recalibrate_batchnorm<T: Scalar>(
    model: &mut TgcnnModel<T>,
    data: &[MapSample<T>],
    batch_size: usize,
) -> Result<()> {
    if data.is_empty() {
        return Err(NnError::EmptyDataset);
    }
    let saved: Vec<f64> = model.batchnorms_mut().iter().map(|bn| bn.momentum).collect();
    let idx: Vec<usize> = (0..data.len()).collect();
    for (k, chunk) in idx.chunks(batch_size.max(1)).enumerate() {
        for bn in model.batchnorms_mut() {
            bn.momentum = 1.0 / (k + 1) as f64;
        }
        let (x, _) = stack(data, chunk)?;
        model.forward(&x, Mode::Train)?;
    }
    for (bn, m) in model.batchnorms_mut().into_iter().zip(saved) {
        bn.momentum = m;
    }
    Ok(())
}

/// Minibatch SGD on the Huber loss. Batch order is drawn from a ChaCha
/// stream seeded by `cfg.seed`, so a run is reproducible bit for bit.
pub fn train_tgcnn<T: Scalar>(
    model: &mut TgcnnModel<T>,
    data: &[MapSample<T>],
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    train_tgcnn_with(model, data, cfg, |_, _| {})
}

/// As [`train_tgcnn`], calling `on_epoch(epoch, mean_loss)` after each epoch.
pub fn train_tgcnn_with<T: Scalar>(
    model: &mut TgcnnModel<T>,
    data: &[MapSample<T>],
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<TrainReport> {
    if data.is_empty() {
        return Err(NnError::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut opt = cfg.optimizer.build::<T>();
    let initial_loss = dataset_loss(model, data)?;
    let mut step_losses = Vec::new();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..data.len()).collect();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut sum = 0.0;
        let mut count = 0;
        for batch in order.chunks(cfg.batch_size.max(1)) {
            let (x, y) = stack(data, batch)?;
            model.zero_grad();
            let pred = model.forward(&x, Mode::Train)?;
            let (loss, grad) = huber_loss_grad(&pred, &y)?;
            model.backward(&grad)?;
            opt.step(model);
            let l = loss.to_f64_lossy();
            step_losses.push(l);
            sum += l * batch.len() as f64;
            count += batch.len();
        }
        let mean = sum / count as f64;
        epoch_losses.push(mean);
        on_epoch(epoch, mean);
    }
    let final_loss = dataset_loss(model, data)?;
    Ok(TrainReport { initial_loss, final_loss, step_losses, epoch_losses })
}
