//! Dense row-major `f64` tensors of rank 1 to 3.

use crate::{NeuralError, Result};

/// Row-major tensor. Rank 3 data is laid out `(steps, batch, features)` with
/// the feature axis contiguous; `step(t)` is then one `(batch, features)`
/// matrix, which is the shape every kernel in this crate works on.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        let n: usize = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; n],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != data.len() || shape.is_empty() || shape.len() > 3 {
            return Err(NeuralError::Shape(format!(
                "{} values for shape {:?}",
                data.len(),
                shape
            )));
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// One time step of a rank-3 tensor as a flat `(batch * features)` slice.
    pub fn step(&self, t: usize) -> &[f64] {
        debug_assert_eq!(self.shape.len(), 3);
        let stride = self.shape[1] * self.shape[2];
        &self.data[t * stride..(t + 1) * stride]
    }

    pub fn step_mut(&mut self, t: usize) -> &mut [f64] {
        debug_assert_eq!(self.shape.len(), 3);
        let stride = self.shape[1] * self.shape[2];
        &mut self.data[t * stride..(t + 1) * stride]
    }

    /// Reverses the leading (time) axis. Used by backward-direction layers.
    pub fn reverse_time(&self) -> Tensor {
        debug_assert_eq!(self.shape.len(), 3);
        let steps = self.shape[0];
        let stride = self.shape[1] * self.shape[2];
        let mut out = Tensor::zeros(&self.shape);
        for t in 0..steps {
            out.data[t * stride..(t + 1) * stride]
                .copy_from_slice(&self.data[(steps - 1 - t) * stride..(steps - t) * stride]);
        }
        out
    }

    /// Concatenates two rank-3 tensors along the feature axis.
    pub fn concat_features(a: &Tensor, b: &Tensor) -> Tensor {
        debug_assert_eq!(a.shape[0], b.shape[0]);
        debug_assert_eq!(a.shape[1], b.shape[1]);
        let (steps, batch) = (a.shape[0], a.shape[1]);
        let (fa, fb) = (a.shape[2], b.shape[2]);
        let mut out = Tensor::zeros(&[steps, batch, fa + fb]);
        for row in 0..steps * batch {
            out.data[row * (fa + fb)..row * (fa + fb) + fa]
                .copy_from_slice(&a.data[row * fa..(row + 1) * fa]);
            out.data[row * (fa + fb) + fa..(row + 1) * (fa + fb)]
                .copy_from_slice(&b.data[row * fb..(row + 1) * fb]);
        }
        out
    }

    /// Splits a rank-3 tensor into two blocks along the feature axis.
    pub fn split_features(&self, fa: usize) -> (Tensor, Tensor) {
        debug_assert_eq!(self.shape.len(), 3);
        let (steps, batch, f) = (self.shape[0], self.shape[1], self.shape[2]);
        debug_assert!(fa <= f);
        let fb = f - fa;
        let mut a = Tensor::zeros(&[steps, batch, fa]);
        let mut b = Tensor::zeros(&[steps, batch, fb]);
        for row in 0..steps * batch {
            a.data[row * fa..(row + 1) * fa].copy_from_slice(&self.data[row * f..row * f + fa]);
            b.data[row * fb..(row + 1) * fb]
                .copy_from_slice(&self.data[row * f + fa..(row + 1) * f]);
        }
        (a, b)
    }
}
