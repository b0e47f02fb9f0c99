//! Model assembly: stacked layers, initialization, forward and backward.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::batchnorm::{bn_backward, bn_forward_infer, bn_forward_train, BnCache};
use crate::dense::{dense_backward, dense_forward, DenseCache};
use crate::params::ParameterSet;
pub use crate::recurrent::CellKind;
use crate::recurrent::{direction_backward, direction_forward, gate_name, DirCache};
use crate::tensor::Tensor;
use crate::{NeuralError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LayerSpec {
    Recurrent {
        cell: CellKind,
        hidden: usize,
        bidirectional: bool,
    },
    BatchNorm,
    DenseSigmoid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub input_features: usize,
    pub layers: Vec<LayerSpec>,
}

impl ModelSpec {
    /// `depth` recurrent layers, each followed by batch normalization when
    /// requested, finished with a per-step sigmoid readout.
    pub fn recurrent_stack(
        cell: CellKind,
        hidden: usize,
        depth: usize,
        bidirectional: bool,
        batch_norm: bool,
        input_features: usize,
    ) -> ModelSpec {
        let mut layers = Vec::new();
        for _ in 0..depth {
            layers.push(LayerSpec::Recurrent {
                cell,
                hidden,
                bidirectional,
            });
            if batch_norm {
                layers.push(LayerSpec::BatchNorm);
            }
        }
        layers.push(LayerSpec::DenseSigmoid);
        ModelSpec {
            input_features,
            layers,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_features == 0 {
            return Err(NeuralError::InvalidSpec("zero input features".into()));
        }
        if self.layers.is_empty() {
            return Err(NeuralError::InvalidSpec("no layers".into()));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            match layer {
                LayerSpec::Recurrent { hidden, .. } if *hidden == 0 => {
                    return Err(NeuralError::InvalidSpec(format!("layer {i} has zero width")));
                }
                LayerSpec::DenseSigmoid if i + 1 != self.layers.len() => {
                    return Err(NeuralError::InvalidSpec(
                        "sigmoid readout must be the last layer".into(),
                    ));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Feature width entering each layer, with the final output width last.
    pub fn feature_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.input_features];
        let mut f = self.input_features;
        for layer in &self.layers {
            f = match layer {
                LayerSpec::Recurrent {
                    hidden,
                    bidirectional,
                    ..
                } => hidden * if *bidirectional { 2 } else { 1 },
                LayerSpec::BatchNorm => f,
                LayerSpec::DenseSigmoid => 1,
            };
            sizes.push(f);
        }
        sizes
    }
}

/// Name, shape, and trainability of every parameter, in definition order.
/// Initialization, checkpoint validation, and tests all derive from this one
/// listing so they cannot drift apart.
pub fn param_layout(spec: &ModelSpec) -> Result<Vec<(String, Vec<usize>, bool)>> {
    spec.validate()?;
    let mut out = Vec::new();
    let mut f = spec.input_features;
    for (i, layer) in spec.layers.iter().enumerate() {
        let prefix = format!("l{i}.");
        match layer {
            LayerSpec::Recurrent {
                cell,
                hidden,
                bidirectional,
            } => {
                let dirs: &[&str] = if *bidirectional { &["f.", "b."] } else { &["f."] };
                for d in dirs {
                    for g in cell.gates() {
                        out.push((
                            format!("{prefix}{d}{}", gate_name("w", g)),
                            vec![f, *hidden],
                            true,
                        ));
                        out.push((
                            format!("{prefix}{d}{}", gate_name("u", g)),
                            vec![*hidden, *hidden],
                            true,
                        ));
                        out.push((
                            format!("{prefix}{d}{}", gate_name("bx", g)),
                            vec![*hidden],
                            true,
                        ));
                        out.push((
                            format!("{prefix}{d}{}", gate_name("bh", g)),
                            vec![*hidden],
                            true,
                        ));
                    }
                }
                f = hidden * dirs.len();
            }
            LayerSpec::BatchNorm => {
                out.push((format!("{prefix}gamma"), vec![f], true));
                out.push((format!("{prefix}beta"), vec![f], true));
                out.push((format!("{prefix}running_mean"), vec![f], false));
                out.push((format!("{prefix}running_var"), vec![f], false));
            }
            LayerSpec::DenseSigmoid => {
                out.push((format!("{prefix}w"), vec![f, 1], true));
                out.push((format!("{prefix}b"), vec![1], true));
                f = 1;
            }
        }
    }
    Ok(out)
}

/// Weight matrices draw from the Glorot uniform range sqrt(6 / (rows + cols));
/// biases and batch-norm shifts start at zero, scales and running variances
/// at one. Draws happen in layout order, so a seed pins every value.
pub fn init_params(spec: &ModelSpec, seed: u64) -> Result<ParameterSet> {
    let layout = param_layout(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = ParameterSet::new();
    for (name, shape, trainable) in layout {
        let tensor = if shape.len() == 2 {
            let limit = (6.0 / (shape[0] + shape[1]) as f64).sqrt();
            let data = (0..shape[0] * shape[1])
                .map(|_| rng.random::<f64>() * 2.0 * limit - limit)
                .collect();
            Tensor::from_vec(&shape, data)?
        } else if name.ends_with("gamma") || name.ends_with("running_var") {
            Tensor::from_vec(&shape, vec![1.0; shape[0]])?
        } else {
            Tensor::zeros(&shape)
        };
        params.push(&name, tensor, trainable);
    }
    Ok(params)
}

enum LayerCache {
    Recurrent {
        fwd: DirCache,
        bwd: Option<DirCache>,
        hidden: usize,
    },
    BatchNorm(BnCache),
    Dense(DenseCache),
}

pub struct ModelCache {
    layers: Vec<LayerCache>,
}

fn check_input(spec: &ModelSpec, x: &Tensor) -> Result<()> {
    if x.shape().len() != 3 || x.shape()[2] != spec.input_features {
        return Err(NeuralError::Shape(format!(
            "input {:?}, expected (steps, batch, {})",
            x.shape(),
            spec.input_features
        )));
    }
    Ok(())
}

/// Training forward: batch-norm layers normalize with batch statistics, and
/// move their running statistics when `update_stats` is set. Returns the
/// cache the backward pass consumes.
pub fn forward_train(
    spec: &ModelSpec,
    params: &mut ParameterSet,
    x: &Tensor,
    update_stats: bool,
) -> Result<(Tensor, ModelCache)> {
    check_input(spec, x)?;
    let mut cur = x.clone();
    let mut caches = Vec::with_capacity(spec.layers.len());
    for (i, layer) in spec.layers.iter().enumerate() {
        match layer {
            LayerSpec::Recurrent {
                cell,
                hidden,
                bidirectional,
            } => {
                let (hf, cf) = direction_forward(*cell, params, &format!("l{i}.f."), &cur, false);
                if *bidirectional {
                    let (hb, cb) =
                        direction_forward(*cell, params, &format!("l{i}.b."), &cur, true);
                    cur = Tensor::concat_features(&hf, &hb);
                    caches.push(LayerCache::Recurrent {
                        fwd: cf,
                        bwd: Some(cb),
                        hidden: *hidden,
                    });
                } else {
                    cur = hf;
                    caches.push(LayerCache::Recurrent {
                        fwd: cf,
                        bwd: None,
                        hidden: *hidden,
                    });
                }
            }
            LayerSpec::BatchNorm => {
                let (y, c) = bn_forward_train(params, &format!("l{i}."), &cur, update_stats);
                cur = y;
                caches.push(LayerCache::BatchNorm(c));
            }
            LayerSpec::DenseSigmoid => {
                let (p, c) = dense_forward(params, &format!("l{i}."), &cur);
                cur = p;
                caches.push(LayerCache::Dense(c));
            }
        }
    }
    Ok((cur, ModelCache { layers: caches }))
}

/// Inference forward: batch-norm layers use their running statistics.
pub fn forward_infer(spec: &ModelSpec, params: &ParameterSet, x: &Tensor) -> Result<Tensor> {
    check_input(spec, x)?;
    let mut cur = x.clone();
    for (i, layer) in spec.layers.iter().enumerate() {
        match layer {
            LayerSpec::Recurrent {
                cell,
                bidirectional,
                ..
            } => {
                let (hf, _) = direction_forward(*cell, params, &format!("l{i}.f."), &cur, false);
                if *bidirectional {
                    let (hb, _) =
                        direction_forward(*cell, params, &format!("l{i}.b."), &cur, true);
                    cur = Tensor::concat_features(&hf, &hb);
                } else {
                    cur = hf;
                }
            }
            LayerSpec::BatchNorm => {
                cur = bn_forward_infer(params, &format!("l{i}."), &cur);
            }
            LayerSpec::DenseSigmoid => {
                let (p, _) = dense_forward(params, &format!("l{i}."), &cur);
                cur = p;
            }
        }
    }
    Ok(cur)
}

/// Gradients of the loss with respect to every parameter, given the gradient
/// with respect to the model output. Shapes mirror the parameter set.
pub fn backward(
    spec: &ModelSpec,
    params: &ParameterSet,
    cache: &ModelCache,
    dout: &Tensor,
) -> Result<ParameterSet> {
    if cache.layers.len() != spec.layers.len() {
        return Err(NeuralError::Shape("cache does not match spec".into()));
    }
    let mut grads = params.zeros_like();
    let mut d = dout.clone();
    for (i, layer) in spec.layers.iter().enumerate().rev() {
        match (layer, &cache.layers[i]) {
            (
                LayerSpec::Recurrent { .. },
                LayerCache::Recurrent { fwd, bwd, hidden },
            ) => {
                if let Some(bwd) = bwd {
                    let (df, db) = d.split_features(*hidden);
                    let mut dx =
                        direction_backward(params, &format!("l{i}.f."), fwd, &df, &mut grads);
                    let dxb =
                        direction_backward(params, &format!("l{i}.b."), bwd, &db, &mut grads);
                    for (a, &b) in dx.data_mut().iter_mut().zip(dxb.data()) {
                        *a += b;
                    }
                    d = dx;
                } else {
                    d = direction_backward(params, &format!("l{i}.f."), fwd, &d, &mut grads);
                }
            }
            (LayerSpec::BatchNorm, LayerCache::BatchNorm(c)) => {
                d = bn_backward(params, &format!("l{i}."), c, &d, &mut grads);
            }
            (LayerSpec::DenseSigmoid, LayerCache::Dense(c)) => {
                d = dense_backward(params, &format!("l{i}."), c, &d, &mut grads);
            }
            _ => return Err(NeuralError::Shape("cache does not match spec".into())),
        }
    }
    Ok(grads)
}

/// Thresholds sigmoid outputs at one half, in flat row-major order.
pub fn predict_bits(p: &Tensor) -> Vec<u8> {
    p.data().iter().map(|&v| u8::from(v > 0.5)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_bi_gru() -> ModelSpec {
        ModelSpec {
            input_features: 2,
            layers: vec![
                LayerSpec::Recurrent {
                    cell: CellKind::Gru,
                    hidden: 3,
                    bidirectional: true,
                },
                LayerSpec::DenseSigmoid,
            ],
        }
    }

    #[test]
    fn parameter_count_of_small_bidirectional_gru() {
        // Per direction: 3 gates x (2*3 input + 3*3 recurrent + 3 + 3 biases)
        // = 3 * 21 = 63. Two directions 126, readout 6 + 1 = 7, total 133.
        let params = init_params(&small_bi_gru(), 0).unwrap();
        assert_eq!(params.num_trainable_scalars(), 133);
    }

    #[test]
    fn glorot_ranges_per_matrix() {
        let params = init_params(&small_bi_gru(), 3).unwrap();
        let checks = [
            ("l0.f.w_z", (6.0f64 / 5.0).sqrt()),  // fan 2 + 3
            ("l0.b.u_h", 1.0),                    // fan 3 + 3
            ("l1.w", (6.0f64 / 7.0).sqrt()),      // fan 6 + 1
        ];
        for (name, limit) in checks {
            let w = params.get(name).data();
            assert!(w.iter().all(|v| v.abs() <= limit), "{name}");
            assert!(w.iter().any(|v| v.abs() > limit * 0.25), "{name} all tiny");
        }
        // biases start dead
        assert!(params.get("l0.f.bx_z").data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn seeds_pin_initialization() {
        let a = init_params(&small_bi_gru(), 11).unwrap();
        let b = init_params(&small_bi_gru(), 11).unwrap();
        let c = init_params(&small_bi_gru(), 12).unwrap();
        for (pa, pb) in a.entries().iter().zip(b.entries()) {
            assert_eq!(pa.tensor, pb.tensor);
        }
        assert!(a
            .entries()
            .iter()
            .zip(c.entries())
            .any(|(pa, pc)| pa.tensor != pc.tensor));
    }

    #[test]
    fn forward_shapes_track_the_stack() {
        let spec = ModelSpec::recurrent_stack(CellKind::Gru, 4, 2, true, true, 3);
        assert_eq!(spec.feature_sizes(), vec![3, 8, 8, 8, 8, 1]);
        let mut params = init_params(&spec, 1).unwrap();
        let x = Tensor::zeros(&[5, 2, 3]);
        let (out, _) = forward_train(&spec, &mut params, &x, false).unwrap();
        assert_eq!(out.shape(), &[5, 2, 1]);
        let out2 = forward_infer(&spec, &params, &x).unwrap();
        assert_eq!(out2.shape(), &[5, 2, 1]);
    }

    #[test]
    fn train_and_infer_agree_without_batchnorm() {
        let spec = ModelSpec::recurrent_stack(CellKind::Lstm, 3, 1, false, false, 2);
        let mut params = init_params(&spec, 5).unwrap();
        let x = Tensor::from_vec(&[3, 2, 2], (0..12).map(|v| v as f64 * 0.1).collect()).unwrap();
        let (a, _) = forward_train(&spec, &mut params, &x, true).unwrap();
        let b = forward_infer(&spec, &params, &x).unwrap();
        for (u, v) in a.data().iter().zip(b.data()) {
            assert!((u - v).abs() < 1e-15);
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = small_bi_gru();
        spec.layers.insert(0, LayerSpec::DenseSigmoid);
        assert!(spec.validate().is_err());
        let empty = ModelSpec {
            input_features: 2,
            layers: vec![],
        };
        assert!(empty.validate().is_err());
        let zero_width = ModelSpec {
            input_features: 2,
            layers: vec![LayerSpec::Recurrent {
                cell: CellKind::Rnn,
                hidden: 0,
                bidirectional: false,
            }],
        };
        assert!(init_params(&zero_width, 0).is_err());
        let bad_input = Tensor::zeros(&[2, 2, 5]);
        let spec = small_bi_gru();
        let mut params = init_params(&spec, 0).unwrap();
        assert!(forward_train(&spec, &mut params, &bad_input, false).is_err());
    }

    #[test]
    fn spec_json_roundtrip() {
        let spec = ModelSpec::recurrent_stack(CellKind::Gru, 8, 2, true, true, 3);
        let s = serde_json::to_string(&spec).unwrap();
        assert!(s.contains("\"cell\":\"gru\""));
        let back: ModelSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn predicted_bits_threshold_at_half() {
        let p = Tensor::from_vec(&[4, 1, 1], vec![0.2, 0.5, 0.51, 0.99]).unwrap();
        assert_eq!(predict_bits(&p), vec![0, 0, 1, 1]);
    }
}
