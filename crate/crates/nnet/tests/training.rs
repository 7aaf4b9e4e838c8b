use vistac_nnet::checkpoint;
use vistac_nnet::loss::huber_loss_grad;
use vistac_nnet::train::stack;
use vistac_nnet::{
    recalibrate_batchnorm, train_tgcnn, Adam, AdamConfig, MapSample, Mode, Module, NnError, OptimizerConfig,
    SgdConfig, Tensor, TgcnnConfig, TgcnnModel, TrainConfig,
};

/// A 32x32 image with a bright square and a Gaussian quality target on it.
fn toy_sample(offset: usize) -> MapSample<f32> {
    let (h, w) = (32, 32);
    let mut img = vec![0.2f32; 3 * h * w];
    let mut tgt = vec![0.0f32; 2 * h * w];
    let (cy, cx) = (12.0 + offset as f32, 16.0);
    for y in 0..h {
        for x in 0..w {
            let (dy, dx) = (y as f32 - cy, x as f32 - cx);
            if dy.abs() < 6.0 && dx.abs() < 6.0 {
                for c in 0..3 {
                    img[c * h * w + y * w + x] = 0.8 - 0.1 * c as f32;
                }
                tgt[y * w + x] = (-(dx * dx + dy * dy) / (2.0 * 4.0f32.powi(2))).exp();
                tgt[h * w + y * w + x] = 0.4;
            }
        }
    }
    MapSample {
        image: Tensor::from_vec(&[3, h, w], img).unwrap(),
        target: Tensor::from_vec(&[2, h, w], tgt).unwrap(),
    }
}

fn cfg(lr: f64, epochs: usize, batch: usize) -> TrainConfig {
    TrainConfig { optimizer: OptimizerConfig::Sgd(SgdConfig { lr, momentum: 0.9, weight_decay: 0.0 }), batch_size: batch, epochs, seed: 11 }
}

#[test]
fn single_sample_overfits() {
    let data = vec![toy_sample(0)];
    let mut model = TgcnnModel::<f32>::new(TgcnnConfig::default(), 5);
    let report = train_tgcnn(&mut model, &data, &cfg(1e-2, 200, 1)).unwrap();
    for (i, l) in report.step_losses.iter().enumerate().step_by(20) {
        println!("step {i}: {l:.5}");
    }
    let first = report.step_losses[0];
    let last = *report.step_losses.last().unwrap();
    println!("first {first:.5} last {last:.5} eval {:.5} -> {:.5}", report.initial_loss, report.final_loss);
    assert_eq!(report.step_losses.len(), 200);
    assert!(last <= 0.1 * first, "loss only fell from {first} to {last}");
    assert!(report.final_loss <= report.initial_loss);
}

#[test]
fn zero_learning_rate_leaves_parameters_unchanged() {
    let data = vec![toy_sample(0), toy_sample(3)];
    let mut model = TgcnnModel::<f32>::new(TgcnnConfig::default(), 5);
    let before = model.param_vector();
    train_tgcnn(&mut model, &data, &cfg(0.0, 3, 2)).unwrap();
    assert_eq!(before, model.param_vector());
}

#[test]
fn same_seed_same_final_loss() {
    let data: Vec<_> = (0..4).map(toy_sample).collect();
    let run = || {
        let mut model = TgcnnModel::<f32>::new(TgcnnConfig::default(), 9);
        let r = train_tgcnn(&mut model, &data, &cfg(5e-3, 3, 2)).unwrap();
        (r.final_loss, r.step_losses, model.param_vector())
    };
    assert_eq!(run(), run());
}

#[test]
fn empty_dataset_is_rejected() {
    let mut model = TgcnnModel::<f32>::new(TgcnnConfig::default(), 5);
    assert!(matches!(train_tgcnn(&mut model, &[], &TrainConfig::default()), Err(NnError::EmptyDataset)));
}

#[test]
fn checkpoint_round_trip_and_version_check() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("model");
    let data = vec![toy_sample(1)];
    let mut model = TgcnnModel::<f32>::new(TgcnnConfig::default(), 5);
    train_tgcnn(&mut model, &data, &cfg(1e-2, 2, 1)).unwrap();
    let manifest = checkpoint::save(&model, "tgcnn", serde_json::to_value(model.config).unwrap(), &stem).unwrap();
    assert!(manifest.tensors.iter().any(|t| t.buffer && t.name.ends_with("running_mean")));

    let mut loaded = TgcnnModel::<f32>::new(TgcnnConfig::default(), 77);
    checkpoint::load(&mut loaded, &stem).unwrap();
    assert_eq!(model.param_vector(), loaded.param_vector());
    let probe = &data[0].image;
    assert_eq!(model.predict(probe).unwrap(), loaded.predict(probe).unwrap());

    let json = stem.with_extension("json");
    let text = std::fs::read_to_string(&json).unwrap().replace("\"version\": 1", "\"version\": 9");
    std::fs::write(&json, text).unwrap();
    assert!(matches!(checkpoint::load(&mut loaded, &stem), Err(NnError::Checkpoint(_))));
}

#[test]
fn adam_first_step_moves_by_lr_times_sign() {
    let data = vec![toy_sample(0), toy_sample(2)];
    let mut model = TgcnnModel::<f32>::new(TgcnnConfig::default(), 3);
    let (x, y) = stack(&data, &[0, 1]).unwrap();
    let pred = model.forward(&x, Mode::Train).unwrap();
    let (_, grad) = huber_loss_grad(&pred, &y).unwrap();
    model.zero_grad();
    model.backward(&grad).unwrap();
    let mut grads = Vec::new();
    model.visit(&mut |_, slot, t| {
        if slot == vistac_nnet::Slot::Param {
            grads.extend(t.grad.clone().unwrap_or_else(|| vec![0.0; t.len()]));
        }
    });
    let before = model.param_vector();
    let lr = 1e-3;
    Adam::new(AdamConfig { lr, ..AdamConfig::default() }).step(&mut model);
    let after = model.param_vector();
    let mut moved = 0;
    for ((b, a), g) in before.iter().zip(&after).zip(&grads) {
        let step = (b - a) as f64;
        if g.abs() > 1e-3 {
            moved += 1;
            assert!((step - lr * g.signum() as f64).abs() < 1e-3 * lr + 1e-6, "step {step} for grad {g}");
        } else if *g == 0.0 {
            assert_eq!(step, 0.0);
        }
    }
    assert!(moved > 0);
}

#[test]
fn recalibrated_eval_matches_batch_statistics() {
    let data: Vec<_> = (0..4).map(toy_sample).collect();
    let mut model = TgcnnModel::<f32>::new(TgcnnConfig::default(), 9);
    let adam = TrainConfig { optimizer: OptimizerConfig::Adam(AdamConfig::default()), ..cfg(0.0, 3, 2) };
    train_tgcnn(&mut model, &data, &adam).unwrap();
    let (x, _) = stack(&data, &[0, 1, 2, 3]).unwrap();
    // running variances are unbiased, batch variances are not, so agreement is up to ~n/(n-1)
    let gap = |m: &TgcnnModel<f32>| {
        let eval = m.clone().forward(&x, Mode::Eval).unwrap();
        let train = m.clone().forward(&x, Mode::Train).unwrap();
        let scale = train.data.iter().fold(0.0f32, |a, v| a.max(v.abs()));
        eval.data.iter().zip(&train.data).map(|(a, b)| (a - b).abs()).fold(0.0f32, f32::max) / scale
    };
    let before = gap(&model);
    recalibrate_batchnorm(&mut model, &data, data.len()).unwrap();
    let after = gap(&model);
    assert!(after < 1e-2, "{after}");
    assert!(after < 0.1 * before, "{before} -> {after}");
    assert!(recalibrate_batchnorm(&mut model, &[], 4).is_err());
}
