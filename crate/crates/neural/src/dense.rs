//! Dense projection to one sigmoid unit per time step.

use crate::linalg::{add_row_broadcast, col_sums, matmul_nn, matmul_nt, matmul_tn};
use crate::params::ParameterSet;
use crate::recurrent::sigmoid_inplace;
use crate::tensor::Tensor;

pub(crate) struct DenseCache {
    x: Tensor,
    p: Tensor,
}

pub(crate) fn dense_forward(params: &ParameterSet, prefix: &str, x: &Tensor) -> (Tensor, DenseCache) {
    let (k, b, f) = (x.shape()[0], x.shape()[1], x.shape()[2]);
    let w = params.get(&format!("{prefix}w"));
    let out_f = w.shape()[1];
    let mut p = Tensor::zeros(&[k, b, out_f]);
    matmul_nn(x.data(), w.data(), k * b, f, out_f, p.data_mut());
    add_row_broadcast(p.data_mut(), params.get(&format!("{prefix}b")).data());
    sigmoid_inplace(p.data_mut());
    let cache = DenseCache {
        x: x.clone(),
        p: p.clone(),
    };
    (p, cache)
}

pub(crate) fn dense_backward(
    params: &ParameterSet,
    prefix: &str,
    cache: &DenseCache,
    dp: &Tensor,
    grads: &mut ParameterSet,
) -> Tensor {
    let (k, b, f) = (
        cache.x.shape()[0],
        cache.x.shape()[1],
        cache.x.shape()[2],
    );
    let out_f = cache.p.shape()[2];
    let rows = k * b;
    // da = dp .* p(1-p)
    let mut da = Tensor::zeros(cache.p.shape());
    for ((d, &g), &p) in da
        .data_mut()
        .iter_mut()
        .zip(dp.data())
        .zip(cache.p.data())
    {
        *d = g * p * (1.0 - p);
    }
    matmul_tn(
        cache.x.data(),
        da.data(),
        f,
        rows,
        out_f,
        grads.get_mut(&format!("{prefix}w")).data_mut(),
    );
    col_sums(da.data(), out_f, grads.get_mut(&format!("{prefix}b")).data_mut());
    let mut dx = Tensor::zeros(cache.x.shape());
    let w = params.get(&format!("{prefix}w")).data();
    matmul_nt(da.data(), w, rows, out_f, f, dx.data_mut());
    dx
}
