//! Losses: smooth-L1 (Huber, delta = 1) for grasp maps and softmax
//! cross-entropy for classification.

use crate::error::{NnError, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Per-entry Huber value for residual `e`: `0.5 e^2` if `|e| < 1`, else `|e| - 0.5`.
pub fn huber<T: Scalar>(e: T) -> T {
    let a = e.abs();
    if a < T::one() {
        T::from_f64_lossy(0.5) * e * e
    } else {
        a - T::from_f64_lossy(0.5)
    }
}

/// Derivative of [`huber`] with respect to `e`.
pub fn huber_grad<T: Scalar>(e: T) -> T {
    if e.abs() < T::one() {
        e
    } else {
        e.signum()
    }
}

fn map_dims<T: Scalar>(pred: &Tensor<T>, target: &Tensor<T>) -> Result<(usize, usize)> {
    target.expect_shape(pred.shape())?;
    let (n, _, h, w) = pred.nchw()?;
    if n == 0 {
        return Err(NnError::Shape { expected: vec![1], got: vec![0] });
    }
    Ok((n, h * w))
}

/// Huber loss between predicted and target grasp maps, both `[n, 2, h, w]`.
///
/// Entries of both channels are summed and divided by the pixel count `h * w`,
/// then averaged over the batch.
pub fn huber_loss<T: Scalar>(pred: &Tensor<T>, target: &Tensor<T>) -> Result<T> {
    let (n, pixels) = map_dims(pred, target)?;
    let total: T = pred.data.iter().zip(&target.data).map(|(&p, &t)| huber(p - t)).sum();
    Ok(total / T::from_usize(n * pixels).expect("count"))
}

/// Loss value and its gradient with respect to `pred`.
pub fn huber_loss_grad<T: Scalar>(pred: &Tensor<T>, target: &Tensor<T>) -> Result<(T, Tensor<T>)> {
    let (n, pixels) = map_dims(pred, target)?;
    let norm = T::from_usize(n * pixels).expect("count");
    let loss = huber_loss(pred, target)?;
    let grad = pred
        .data
        .iter()
        .zip(&target.data)
        .map(|(&p, &t)| huber_grad(p - t) / norm)
        .collect();
    Ok((loss, Tensor::from_vec(pred.shape(), grad)?))
}

/// Row-wise softmax of `[n, c]` logits.
pub fn softmax<T: Scalar>(logits: &Tensor<T>) -> Result<Tensor<T>> {
    let c = match logits.shape() {
        [_, c] => *c,
        s => return Err(NnError::Shape { expected: vec![0, 0], got: s.to_vec() }),
    };
    let mut out = logits.clone();
    out.grad = None;
    for row in out.data.chunks_mut(c) {
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        row.iter_mut().for_each(|v| *v = (*v - max).exp());
        let z: T = row.iter().copied().sum();
        row.iter_mut().for_each(|v| *v = *v / z);
    }
    Ok(out)
}

/// Mean cross-entropy of `[n, c]` logits against integer labels, with gradient.
pub fn cross_entropy_grad<T: Scalar>(logits: &Tensor<T>, labels: &[usize]) -> Result<(T, Tensor<T>)> {
    let probs = softmax(logits)?;
    let (n, c) = (logits.shape()[0], logits.shape()[1]);
    if labels.len() != n || labels.iter().any(|&l| l >= c) {
        return Err(NnError::Shape { expected: vec![n], got: vec![labels.len()] });
    }
    let nf = T::from_usize(n).expect("count");
    let mut loss = T::zero();
    let mut grad = probs.clone();
    for (i, &l) in labels.iter().enumerate() {
        let p = probs.data[i * c + l].max(T::min_positive_value());
        loss = loss - p.ln();
        grad.data[i * c + l] = grad.data[i * c + l] - T::one();
    }
    grad.data.iter_mut().for_each(|g| *g = *g / nf);
    Ok((loss / nf, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn maps(vals: &[f64]) -> Tensor<f64> {
        Tensor::from_vec(&[1, 2, 1, vals.len() / 2], vals.to_vec()).unwrap()
    }

    #[test]
    fn huber_entry_values() {
        assert_eq!(huber(0.5f64), 0.125);
        assert_eq!(huber(3.0f64), 2.5);
        assert_eq!(huber(-3.0f64), 2.5);
        assert_eq!(huber_grad(0.0f64), 0.0);
        assert_eq!(huber_grad(-4.0f64), -1.0);
    }

    #[test]
    fn identical_maps_have_zero_loss() {
        let a = maps(&[0.1, 0.7, -2.0, 4.0]);
        assert_eq!(huber_loss(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn single_pixel_contribution_is_normalized_by_pixels() {
        let target = maps(&[0.0; 8]);
        let mut pred = maps(&[0.0; 8]);
        pred.data[5] = 3.0;
        // 4 pixels per map
        assert_eq!(huber_loss(&pred, &target).unwrap(), 2.5 / 4.0);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let a = maps(&[0.0; 4]);
        let b = maps(&[0.0; 8]);
        assert!(huber_loss(&a, &b).is_err());
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let t = Tensor::from_vec(&[2, 3], vec![1.0, 2.0, 3.0, -50.0, 0.0, 50.0]).unwrap();
        let p = softmax(&t).unwrap();
        for row in p.data.chunks(3) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
