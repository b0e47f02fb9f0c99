//! Adam with global gradient norm clipping.

use crate::params::ParameterSet;

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// Scales every trainable gradient so their joint Euclidean norm is at most
/// `max_norm`. Returns the norm before clipping.
pub fn clip_global_norm(grads: &mut ParameterSet, max_norm: f64) -> f64 {
    let mut sq = 0.0;
    for p in grads.entries() {
        if p.trainable {
            for &g in p.tensor.data() {
                sq += g * g;
            }
        }
    }
    let norm = sq.sqrt();
    if norm > max_norm && norm > 0.0 {
        let scale = max_norm / norm;
        for p in grads.entries_mut() {
            if p.trainable {
                for g in p.tensor.data_mut() {
                    *g *= scale;
                }
            }
        }
    }
    norm
}

/// First and second moment buffers aligned with the parameter set by index.
pub struct Adam {
    t: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(params: &ParameterSet) -> Adam {
        Adam {
            t: 0,
            m: params
                .entries()
                .iter()
                .map(|p| vec![0.0; p.tensor.numel()])
                .collect(),
            v: params
                .entries()
                .iter()
                .map(|p| vec![0.0; p.tensor.numel()])
                .collect(),
        }
    }

    pub fn step(&mut self, params: &mut ParameterSet, grads: &ParameterSet, lr: f64) {
        assert_eq!(params.len(), grads.len(), "gradient set misaligned");
        self.t += 1;
        let bc1 = 1.0 - ADAM_BETA1.powi(self.t as i32);
        let bc2 = 1.0 - ADAM_BETA2.powi(self.t as i32);
        for (idx, (p, g)) in params
            .entries_mut()
            .iter_mut()
            .zip(grads.entries())
            .enumerate()
        {
            if !p.trainable {
                continue;
            }
            debug_assert_eq!(p.name, g.name);
            let m = &mut self.m[idx];
            let v = &mut self.v[idx];
            for ((w, &gr), (mi, vi)) in p
                .tensor
                .data_mut()
                .iter_mut()
                .zip(g.tensor.data())
                .zip(m.iter_mut().zip(v.iter_mut()))
            {
                *mi = ADAM_BETA1 * *mi + (1.0 - ADAM_BETA1) * gr;
                *vi = ADAM_BETA2 * *vi + (1.0 - ADAM_BETA2) * gr * gr;
                let mhat = *mi / bc1;
                let vhat = *vi / bc2;
                *w -= lr * mhat / (vhat.sqrt() + ADAM_EPS);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor;

    fn one_param(v: f64) -> ParameterSet {
        let mut ps = ParameterSet::new();
        ps.push("w", Tensor::from_vec(&[1], vec![v]).unwrap(), true);
        ps
    }

    #[test]
    fn first_step_moves_by_almost_lr() {
        // With a unit gradient, mhat = 1 and vhat = 1 after bias correction,
        // so the first update is lr / (1 + eps).
        let mut ps = one_param(2.0);
        let mut grads = ps.zeros_like();
        grads.get_mut("w").data_mut()[0] = 1.0;
        let mut adam = Adam::new(&ps);
        adam.step(&mut ps, &grads, 1e-3);
        let got = ps.get("w").data()[0];
        assert!((got - (2.0 - 1e-3 / (1.0 + ADAM_EPS))).abs() < 1e-15);
    }

    #[test]
    fn zero_learning_rate_freezes_parameters() {
        let mut ps = one_param(0.7);
        let mut grads = ps.zeros_like();
        grads.get_mut("w").data_mut()[0] = 3.0;
        let mut adam = Adam::new(&ps);
        adam.step(&mut ps, &grads, 0.0);
        assert_eq!(ps.get("w").data()[0], 0.7);
    }

    #[test]
    fn non_trainable_entries_never_move() {
        let mut ps = ParameterSet::new();
        ps.push("w", Tensor::from_vec(&[1], vec![1.0]).unwrap(), true);
        ps.push("stats", Tensor::from_vec(&[1], vec![5.0]).unwrap(), false);
        let mut grads = ps.zeros_like();
        grads.get_mut("w").data_mut()[0] = 1.0;
        grads.get_mut("stats").data_mut()[0] = 100.0;
        let mut adam = Adam::new(&ps);
        adam.step(&mut ps, &grads, 0.1);
        assert_eq!(ps.get("stats").data()[0], 5.0);
        assert!(ps.get("w").data()[0] < 1.0);
    }

    #[test]
    fn clipping_rescales_only_when_needed() {
        let mut ps = ParameterSet::new();
        ps.push("a", Tensor::from_vec(&[2], vec![3.0, 0.0]).unwrap(), true);
        ps.push("b", Tensor::from_vec(&[1], vec![4.0]).unwrap(), true);
        ps.push("frozen", Tensor::from_vec(&[1], vec![99.0]).unwrap(), false);
        // norm over trainable entries: sqrt(9 + 16) = 5, clipped to 1
        let norm = clip_global_norm(&mut ps, 1.0);
        assert!((norm - 5.0).abs() < 1e-15);
        assert!((ps.get("a").data()[0] - 0.6).abs() < 1e-15);
        assert!((ps.get("b").data()[0] - 0.8).abs() < 1e-15);
        assert_eq!(ps.get("frozen").data()[0], 99.0);
        // under the limit nothing changes
        let norm2 = clip_global_norm(&mut ps, 10.0);
        assert!((norm2 - 1.0).abs() < 1e-12);
        assert!((ps.get("b").data()[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn repeated_steps_descend_a_quadratic() {
        // minimize (w - 3)^2 by its own gradient
        let mut ps = one_param(0.0);
        let mut adam = Adam::new(&ps);
        for _ in 0..4000 {
            let w = ps.get("w").data()[0];
            let mut grads = ps.zeros_like();
            grads.get_mut("w").data_mut()[0] = 2.0 * (w - 3.0);
            adam.step(&mut ps, &grads, 0.01);
        }
        assert!((ps.get("w").data()[0] - 3.0).abs() < 1e-3);
    }
}
