//! Central finite differences for verifying analytic gradients, and a
//! randomized suite that checks every layer of the engine against them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::layers::{BatchNorm2d, Conv2d, ConvTranspose2d, Layer, Linear, Mode, Relu, Slot};
use crate::loss::{cross_entropy_grad, huber_loss, huber_loss_grad};
use crate::module::Module;
use crate::tensor::Tensor;
use crate::tgcnn::{ResidualBlock, TgcnnConfig, TgcnnModel};

/// Step used by the suite.
pub const EPS: f64 = 1e-5;
/// Denominator floor for [`rel_error`] in the suite.
pub const REL_FLOOR: f64 = 1e-3;

/// `(f(x + eps e_i) - f(x - eps e_i)) / 2 eps` for each requested coordinate.
pub fn central_diff(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], coords: &[usize], eps: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    coords
        .iter()
        .map(|&i| {
            probe[i] = x[i] + eps;
            let plus = f(&probe);
            probe[i] = x[i] - eps;
            let minus = f(&probe);
            probe[i] = x[i];
            (plus - minus) / (2.0 * eps)
        })
        .collect()
}

/// `|a - n| / max(|a|, |n|, floor)`: relative error that degrades to an
/// absolute error scaled by `1 / floor` for near-zero gradients.
pub fn rel_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

/// Largest [`rel_error`] over paired slices.
pub fn max_rel_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| rel_error(a, n, floor))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub primitive: &'static str,
    pub shape: Vec<usize>,
    pub checked: usize,
    pub max_rel_error: f64,
}

const PRIMITIVES: [&str; 13] = [
    "conv2d",
    "conv_transpose2d",
    "batchnorm2d_train",
    "batchnorm2d_eval",
    "relu",
    "add",
    "linear",
    "huber",
    "softmax_cross_entropy",
    "residual_block",
    "tgcnn",
    "tgcnn_default",
    "mlp",
];

pub fn primitives() -> &'static [&'static str] {
    &PRIMITIVES
}

fn rand_tensor(rng: &mut ChaCha8Rng, shape: &[usize], scale: f64) -> Tensor<f64> {
    let n = shape.iter().product();
    Tensor::from_vec(shape, (0..n).map(|_| rng.random_range(-scale..scale)).collect()).expect("shape")
}

/// Sample up to `max` distinct coordinates out of `len`.
fn coords(rng: &mut ChaCha8Rng, len: usize, max: usize) -> Vec<usize> {
    if len <= max {
        (0..len).collect()
    } else {
        rand::seq::index::sample(rng, len, max).into_vec()
    }
}

/// Randomize every tensor so no pre-activation sits exactly on a ReLU kink.
fn jitter_params(rng: &mut ChaCha8Rng, visit: &mut dyn FnMut(&mut dyn FnMut(&str, Slot, &mut Tensor<f64>))) {
    visit(&mut |name, slot, t| {
        for v in t.data.iter_mut() {
            *v = match (slot, name.ends_with("running_var") || name.ends_with("gamma")) {
                (_, true) => rng.random_range(0.5..1.5),
                (Slot::Buffer, false) => rng.random_range(-0.3..0.3),
                (Slot::Param, false) => *v + rng.random_range(-0.2..0.2),
            };
        }
    });
}

fn flat_params(visit: &dyn Fn(&mut dyn FnMut(&str, Slot, &Tensor<f64>))) -> (Vec<f64>, Vec<f64>) {
    let (mut vals, mut grads) = (Vec::new(), Vec::new());
    visit(&mut |_, slot, t| {
        if slot == Slot::Param {
            vals.extend_from_slice(&t.data);
            match &t.grad {
                Some(g) => grads.extend_from_slice(g),
                None => grads.extend(std::iter::repeat_n(0.0, t.len())),
            }
        }
    });
    (vals, grads)
}

fn set_flat_param(visit: &mut dyn FnMut(&mut dyn FnMut(&str, Slot, &mut Tensor<f64>)), idx: usize, value: f64) {
    let mut base = 0;
    visit(&mut |_, slot, t| {
        if slot == Slot::Param {
            if idx >= base && idx < base + t.len() {
                t.data[idx - base] = value;
            }
            base += t.len();
        }
    });
}

/// Check input and parameter gradients of a network-like object for the
/// objective `sum(w * f(x))` with a fixed random projection `w`.
fn check_generic<N>(
    net: &mut N,
    x: &Tensor<f64>,
    rng: &mut ChaCha8Rng,
    forward: fn(&mut N, &Tensor<f64>) -> Tensor<f64>,
    backward: fn(&mut N, &Tensor<f64>) -> Tensor<f64>,
    visit: fn(&N, &mut dyn FnMut(&str, Slot, &Tensor<f64>)),
    visit_mut: fn(&mut N, &mut dyn FnMut(&str, Slot, &mut Tensor<f64>)),
) -> (usize, f64) {
    visit_mut(net, &mut |_, slot, t| {
        if slot == Slot::Param {
            t.zero_grad();
        }
    });
    let y = forward(net, x);
    let w = rand_tensor(rng, y.shape(), 1.0);
    let objective = |y: &Tensor<f64>| y.data.iter().zip(&w.data).map(|(a, b)| a * b).sum::<f64>();
    let dx = backward(net, &w);
    let (theta, dtheta) = flat_params(&|f| visit(net, f));

    let xc = coords(rng, x.len(), 48);
    let mut f_x = |v: &[f64]| {
        let xt = Tensor::from_vec(x.shape(), v.to_vec()).expect("shape");
        objective(&forward(net, &xt))
    };
    let num_x = central_diff(&mut f_x, &x.data, &xc, EPS);
    let ana_x: Vec<f64> = xc.iter().map(|&i| dx.data[i]).collect();
    let mut worst = max_rel_error(&ana_x, &num_x, REL_FLOOR);

    let pc = coords(rng, theta.len(), 64);
    let mut f_p = |v: &[f64]| {
        for &i in &pc {
            set_flat_param(&mut |f| visit_mut(net, f), i, v[i]);
        }
        let out = objective(&forward(net, x));
        for &i in &pc {
            set_flat_param(&mut |f| visit_mut(net, f), i, theta[i]);
        }
        out
    };
    let num_p = central_diff(&mut f_p, &theta, &pc, EPS);
    let ana_p: Vec<f64> = pc.iter().map(|&i| dtheta[i]).collect();
    worst = worst.max(max_rel_error(&ana_p, &num_p, REL_FLOOR));
    (xc.len() + pc.len(), worst)
}

fn check_layer<L: Layer<f64>>(layer: &mut L, x: &Tensor<f64>, mode: Mode, rng: &mut ChaCha8Rng) -> (usize, f64) {
    jitter_params(rng, &mut |f| layer.visit_mut(f));
    // fn pointers cannot capture `mode`
    match mode {
        Mode::Train => check_generic(
            layer,
            x,
            rng,
            |l, x| l.forward(x, Mode::Train).expect("forward"),
            |l, g| l.backward(g).expect("backward"),
            |l, f| l.visit(f),
            |l, f| l.visit_mut(f),
        ),
        Mode::Eval => check_generic(
            layer,
            x,
            rng,
            |l, x| l.forward(x, Mode::Eval).expect("forward"),
            |l, g| l.backward(g).expect("backward"),
            |l, f| l.visit(f),
            |l, f| l.visit_mut(f),
        ),
    }
}

/// Run one randomized check of `primitive`; returns the checked shape,
/// number of coordinates and worst relative error.
pub fn check_primitive(primitive: &str, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=2);
    let c = rng.random_range(1..=3);
    let h = rng.random_range(4..=8);
    let w = rng.random_range(4..=8);
    let (shape, (checked, err)) = match primitive {
        "conv2d" => {
            let k = [1, 3, 5][rng.random_range(0..3)];
            let stride = rng.random_range(1..=2);
            let pad = rng.random_range(0..=k / 2);
            let out = rng.random_range(1..=3);
            let mut layer = Conv2d::<f64>::new(c, out, k, stride, pad, &mut rng);
            let x = rand_tensor(&mut rng, &[n, c, h.max(k), w.max(k)], 1.0);
            (x.shape().to_vec(), check_layer(&mut layer, &x, Mode::Train, &mut rng))
        }
        "conv_transpose2d" => {
            let k = rng.random_range(2..=4);
            let stride = rng.random_range(1..=2);
            let pad = rng.random_range(0..=1).min(k - 1);
            let out = rng.random_range(1..=3);
            let mut layer = ConvTranspose2d::<f64>::new(c, out, k, stride, pad, &mut rng);
            let x = rand_tensor(&mut rng, &[n, c, h, w], 1.0);
            (x.shape().to_vec(), check_layer(&mut layer, &x, Mode::Train, &mut rng))
        }
        "batchnorm2d_train" | "batchnorm2d_eval" => {
            let mut layer = BatchNorm2d::<f64>::new(c);
            let x = rand_tensor(&mut rng, &[n, c, h, w], 2.0);
            let mode = if primitive.ends_with("train") { Mode::Train } else { Mode::Eval };
            (x.shape().to_vec(), check_layer(&mut layer, &x, mode, &mut rng))
        }
        "relu" => {
            let mut layer = Relu::new();
            // keep inputs well away from the kink at zero
            let mut x = rand_tensor(&mut rng, &[n, c, h, w], 1.0);
            x.data.iter_mut().for_each(|v| *v += 0.05 * v.signum());
            (x.shape().to_vec(), check_layer(&mut layer, &x, Mode::Train, &mut rng))
        }
        "add" => {
            let other = rand_tensor(&mut rng, &[n, c, h, w], 1.0);
            let x = rand_tensor(&mut rng, &[n, c, h, w], 1.0);
            let mut net = AddProbe { other };
            let res = check_generic(
                &mut net,
                &x,
                &mut rng,
                |p, x| crate::layers::add(x, &p.other).expect("add"),
                |_, g| g.clone(),
                |_, _| {},
                |_, _| {},
            );
            (x.shape().to_vec(), res)
        }
        "linear" => {
            let (din, dout) = (rng.random_range(1..=12), rng.random_range(1..=6));
            let bias = rng.random_bool(0.5);
            let mut layer = Linear::<f64>::new(din, dout, bias, &mut rng);
            let x = rand_tensor(&mut rng, &[n + 1, din], 1.0);
            (x.shape().to_vec(), check_layer(&mut layer, &x, Mode::Train, &mut rng))
        }
        "huber" => {
            let target = rand_tensor(&mut rng, &[n, 2, h, w], 1.0);
            let mut pred = rand_tensor(&mut rng, &[n, 2, h, w], 3.0);
            // avoid the |e| = 1 seam of the piecewise definition
            for (p, t) in pred.data.iter_mut().zip(&target.data) {
                if ((*p - t).abs() - 1.0).abs() < 0.01 {
                    *p += 0.05;
                }
            }
            let (_, g) = huber_loss_grad(&pred, &target).expect("huber");
            let xc = coords(&mut rng, pred.len(), 64);
            let mut f = |v: &[f64]| {
                huber_loss(&Tensor::from_vec(pred.shape(), v.to_vec()).expect("shape"), &target).expect("huber")
            };
            let num = central_diff(&mut f, &pred.data, &xc, EPS);
            let ana: Vec<f64> = xc.iter().map(|&i| g.data[i]).collect();
            (pred.shape().to_vec(), (xc.len(), max_rel_error(&ana, &num, REL_FLOOR)))
        }
        "softmax_cross_entropy" => {
            let classes = rng.random_range(2..=6);
            let rows = n + 2;
            let logits = rand_tensor(&mut rng, &[rows, classes], 3.0);
            let labels: Vec<usize> = (0..rows).map(|_| rng.random_range(0..classes)).collect();
            let (_, g) = cross_entropy_grad(&logits, &labels).expect("ce");
            let xc: Vec<usize> = (0..logits.len()).collect();
            let mut f = |v: &[f64]| {
                cross_entropy_grad(&Tensor::from_vec(logits.shape(), v.to_vec()).expect("shape"), &labels)
                    .expect("ce")
                    .0
            };
            let num = central_diff(&mut f, &logits.data, &xc, EPS);
            (logits.shape().to_vec(), (xc.len(), max_rel_error(&g.data, &num, REL_FLOOR)))
        }
        "residual_block" => {
            let mut block = ResidualBlock::<f64>::new(c, &mut rng);
            let x = rand_tensor(&mut rng, &[n + 1, c, h, w], 1.0);
            (x.shape().to_vec(), check_layer(&mut block, &x, Mode::Train, &mut rng))
        }
        "tgcnn" | "tgcnn_default" => {
            let cfg = if primitive == "tgcnn" {
                TgcnnConfig { enc1: 3, enc2: 4, dec2: 2, blocks: 1 }
            } else {
                TgcnnConfig::default()
            };
            let mut model = TgcnnModel::<f64>::new(cfg, seed);
            jitter_params(&mut rng, &mut |f| model.visit_mut(f));
            let x = rand_tensor(&mut rng, &[2, 3, 8, 8], 1.0);
            let res = check_generic(
                &mut model,
                &x,
                &mut rng,
                |m, x| m.forward(x, Mode::Train).expect("forward"),
                |m, g| m.backward(g).expect("backward"),
                |m, f| Module::visit(m, f),
                |m, f| Module::visit_mut(m, f),
            );
            (x.shape().to_vec(), res)
        }
        "mlp" => {
            let din = rng.random_range(2..=10);
            let mut mlp = crate::mlp::Mlp::<f64>::new(&[din, 7, 5, 3], seed);
            jitter_params(&mut rng, &mut |f| mlp.visit_mut(f));
            let x = rand_tensor(&mut rng, &[n + 1, din], 1.0);
            let res = check_generic(
                &mut mlp,
                &x,
                &mut rng,
                |m, x| m.forward(x, Mode::Train).expect("forward"),
                |m, g| m.backward(g).expect("backward"),
                |m, f| Module::visit(m, f),
                |m, f| Module::visit_mut(m, f),
            );
            (x.shape().to_vec(), res)
        }
        other => panic!("unknown primitive `{other}`"),
    };
    let primitive = PRIMITIVES.iter().copied().find(|p| *p == primitive).expect("known primitive");
    CheckResult { primitive, shape, checked, max_rel_error: err }
}

struct AddProbe {
    other: Tensor<f64>,
}

/// `count` randomized checks cycling over every primitive.
pub fn run_suite(count: usize, seed: u64) -> Vec<CheckResult> {
    (0..count)
        .map(|i| check_primitive(PRIMITIVES[i % PRIMITIVES.len()], seed.wrapping_mul(1000).wrapping_add(i as u64)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_gradient() {
        let mut f = |v: &[f64]| v[0] * v[0] + 3.0 * v[1];
        let g = central_diff(&mut f, &[2.0, -1.0], &[0, 1], 1e-5);
        assert!((g[0] - 4.0).abs() < 1e-8);
        assert!((g[1] - 3.0).abs() < 1e-8);
    }
}
