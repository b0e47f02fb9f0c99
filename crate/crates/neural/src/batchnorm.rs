//! Batch normalization over the combined step and batch axes.
//!
//! A (steps, batch, features) activation is treated as steps*batch rows, so
//! one feature shares its statistics across every position in the sequence.
//! Variance is the biased (divide by N) estimate in both the normalization
//! and the running average.

use crate::linalg::col_sums;
use crate::params::ParameterSet;
use crate::tensor::Tensor;

pub const BN_EPS: f64 = 1e-5;
pub const BN_MOMENTUM: f64 = 0.99;

pub(crate) struct BnCache {
    xhat: Tensor,
    inv_std: Vec<f64>,
}

/// Training-mode forward using batch statistics. When `update_stats` is set
/// the running mean and variance stored in `params` move toward the batch:
/// running = momentum * running + (1 - momentum) * batch.
pub(crate) fn bn_forward_train(
    params: &mut ParameterSet,
    prefix: &str,
    x: &Tensor,
    update_stats: bool,
) -> (Tensor, BnCache) {
    let (k, b, f) = (x.shape()[0], x.shape()[1], x.shape()[2]);
    let rows = k * b;
    let n = rows as f64;
    let mut mean = vec![0.0; f];
    col_sums(x.data(), f, &mut mean);
    for m in &mut mean {
        *m /= n;
    }
    let mut var = vec![0.0; f];
    for row in x.data().chunks_exact(f) {
        for (j, &v) in row.iter().enumerate() {
            let d = v - mean[j];
            var[j] += d * d;
        }
    }
    for v in &mut var {
        *v /= n;
    }
    let inv_std: Vec<f64> = var.iter().map(|&v| 1.0 / (v + BN_EPS).sqrt()).collect();

    if update_stats {
        let rm = params.get_mut(&format!("{prefix}running_mean")).data_mut();
        for (r, &m) in rm.iter_mut().zip(&mean) {
            *r = BN_MOMENTUM * *r + (1.0 - BN_MOMENTUM) * m;
        }
        let rv = params.get_mut(&format!("{prefix}running_var")).data_mut();
        for (r, &v) in rv.iter_mut().zip(&var) {
            *r = BN_MOMENTUM * *r + (1.0 - BN_MOMENTUM) * v;
        }
    }

    let gamma = params.get(&format!("{prefix}gamma")).data();
    let beta = params.get(&format!("{prefix}beta")).data();
    let mut xhat = Tensor::zeros(&[k, b, f]);
    let mut y = Tensor::zeros(&[k, b, f]);
    for (row_idx, row) in x.data().chunks_exact(f).enumerate() {
        let xh = &mut xhat.data_mut()[row_idx * f..(row_idx + 1) * f];
        let yr = &mut y.data_mut()[row_idx * f..(row_idx + 1) * f];
        for j in 0..f {
            xh[j] = (row[j] - mean[j]) * inv_std[j];
            yr[j] = gamma[j] * xh[j] + beta[j];
        }
    }
    (y, BnCache { xhat, inv_std })
}

/// Inference-mode forward using the stored running statistics.
pub(crate) fn bn_forward_infer(params: &ParameterSet, prefix: &str, x: &Tensor) -> Tensor {
    let f = x.shape()[2];
    let rm = params.get(&format!("{prefix}running_mean")).data();
    let rv = params.get(&format!("{prefix}running_var")).data();
    let gamma = params.get(&format!("{prefix}gamma")).data();
    let beta = params.get(&format!("{prefix}beta")).data();
    let inv_std: Vec<f64> = rv.iter().map(|&v| 1.0 / (v + BN_EPS).sqrt()).collect();
    let mut y = x.clone();
    for row in y.data_mut().chunks_exact_mut(f) {
        for j in 0..f {
            row[j] = gamma[j] * (row[j] - rm[j]) * inv_std[j] + beta[j];
        }
    }
    y
}

pub(crate) fn bn_backward(
    params: &ParameterSet,
    prefix: &str,
    cache: &BnCache,
    dy: &Tensor,
    grads: &mut ParameterSet,
) -> Tensor {
    let f = dy.shape()[2];
    let rows = dy.numel() / f;
    let n = rows as f64;
    let gamma = params.get(&format!("{prefix}gamma")).data();

    // dbeta = sum dy, dgamma = sum dy .* xhat
    col_sums(dy.data(), f, grads.get_mut(&format!("{prefix}beta")).data_mut());
    let mut sum_dy = vec![0.0; f];
    let mut sum_dy_xhat = vec![0.0; f];
    for (row_idx, row) in dy.data().chunks_exact(f).enumerate() {
        let xh = &cache.xhat.data()[row_idx * f..(row_idx + 1) * f];
        for j in 0..f {
            sum_dy[j] += row[j];
            sum_dy_xhat[j] += row[j] * xh[j];
        }
    }
    {
        let dg = grads.get_mut(&format!("{prefix}gamma")).data_mut();
        for j in 0..f {
            dg[j] += sum_dy_xhat[j];
        }
    }

    // dx = gamma * inv_std / N * (N*dy - sum dy - xhat * sum(dy .* xhat))
    let mut dx = Tensor::zeros(dy.shape());
    for (row_idx, row) in dy.data().chunks_exact(f).enumerate() {
        let xh = &cache.xhat.data()[row_idx * f..(row_idx + 1) * f];
        let dxr = &mut dx.data_mut()[row_idx * f..(row_idx + 1) * f];
        for j in 0..f {
            dxr[j] = gamma[j] * cache.inv_std[j] / n
                * (n * row[j] - sum_dy[j] - xh[j] * sum_dy_xhat[j]);
        }
    }
    dx
}
