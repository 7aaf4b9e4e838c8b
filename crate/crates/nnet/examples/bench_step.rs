use std::time::Instant;

use vistac_nnet::loss::huber_loss_grad;
use vistac_nnet::{Mode, Module, Sgd, SgdConfig, Tensor, TgcnnConfig, TgcnnModel};

fn main() {
    let mut model = TgcnnModel::<f32>::new(TgcnnConfig::default(), 0);
    let n = 8;
    let x = Tensor::from_vec(&[n, 3, 96, 96], (0..n * 3 * 96 * 96).map(|i| ((i * 7919) % 101) as f32 / 101.0).collect()).unwrap();
    let y = Tensor::zeros(&[n, 2, 96, 96]);
    let mut opt = Sgd::new(SgdConfig::default());
    let t = Instant::now();
    let steps = 10;
    for _ in 0..steps {
        model.zero_grad();
        let p = model.forward(&x, Mode::Train).unwrap();
        let (_, g) = huber_loss_grad(&p, &y).unwrap();
        model.backward(&g).unwrap();
        opt.step(&mut model);
    }
    let dt = t.elapsed().as_secs_f64() / (steps * n) as f64;
    println!("{:.2} ms per sample-step", dt * 1e3);
}
