//! Mini-batch training loop.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::loss::{loss_and_grad, LossKind};
use crate::model::{backward, forward_infer, forward_train, ModelSpec};
use crate::optim::{clip_global_norm, Adam};
use crate::params::ParameterSet;
use crate::tensor::Tensor;
use crate::{NeuralError, Result};

/// Fixed-length sequence examples stored flat: example `i` occupies
/// `steps * features` input values (step-major) and `steps` scalar targets.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub steps: usize,
    pub features: usize,
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        if self.steps == 0 || self.features == 0 {
            return 0;
        }
        self.inputs.len() / (self.steps * self.features)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 || self.features == 0 {
            return Err(NeuralError::Shape("empty dataset dimensions".into()));
        }
        let per = self.steps * self.features;
        if self.inputs.len() % per != 0 || self.inputs.is_empty() {
            return Err(NeuralError::Shape(format!(
                "{} input values do not tile {} per example",
                self.inputs.len(),
                per
            )));
        }
        if self.targets.len() != self.len() * self.steps {
            return Err(NeuralError::Shape(format!(
                "{} targets for {} examples of {} steps",
                self.targets.len(),
                self.len(),
                self.steps
            )));
        }
        Ok(())
    }

    /// Assembles the chosen examples into time-major `(steps, batch, features)`
    /// inputs and `(steps, batch, 1)` targets.
    pub fn batch(&self, indices: &[usize]) -> (Tensor, Tensor) {
        let (k, f, b) = (self.steps, self.features, indices.len());
        let mut x = Tensor::zeros(&[k, b, f]);
        let mut y = Tensor::zeros(&[k, b, 1]);
        for (bi, &ex) in indices.iter().enumerate() {
            for t in 0..k {
                let src = &self.inputs[(ex * k + t) * f..(ex * k + t + 1) * f];
                x.step_mut(t)[bi * f..(bi + 1) * f].copy_from_slice(src);
                y.step_mut(t)[bi] = self.targets[ex * k + t];
            }
        }
        (x, y)
    }
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub clip_norm: f64,
    pub loss: LossKind,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 100,
            learning_rate: 1e-3,
            clip_norm: 1.0,
            loss: LossKind::Mse,
            seed: 0,
            shuffle: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    /// Mean per-element training loss of each epoch.
    pub epoch_losses: Vec<f64>,
}

/// Shuffled mini-batch gradient descent with Adam. Deterministic for a fixed
/// config: the only randomness is the shuffle generator seeded from the
/// config, and all arithmetic is single threaded.
pub fn train(
    spec: &ModelSpec,
    params: &mut ParameterSet,
    data: &Dataset,
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    data.validate()?;
    if cfg.batch_size == 0 {
        return Err(NeuralError::Shape("zero batch size".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = Adam::new(params);
    let mut indices: Vec<usize> = (0..data.len()).collect();
    let mut report = TrainReport {
        epoch_losses: Vec::with_capacity(cfg.epochs),
    };
    for _ in 0..cfg.epochs {
        if cfg.shuffle {
            indices.shuffle(&mut rng);
        }
        let mut loss_sum = 0.0;
        let mut elems = 0usize;
        for chunk in indices.chunks(cfg.batch_size) {
            let (x, y) = data.batch(chunk);
            let (out, cache) = forward_train(spec, params, &x, true)?;
            let (loss, dout) = loss_and_grad(cfg.loss, &out, &y)?;
            let mut grads = backward(spec, params, &cache, &dout)?;
            clip_global_norm(&mut grads, cfg.clip_norm);
            adam.step(params, &grads, cfg.learning_rate);
            loss_sum += loss * out.numel() as f64;
            elems += out.numel();
        }
        report.epoch_losses.push (loss_sum / elems as f64);
    }
    Ok(report)
}

/// Mean per-element loss over a dataset in inference mode, without touching
/// parameters or statistics.
pub fn evaluate_loss(
    spec: &ModelSpec,
    params: &ParameterSet,
    data: &Dataset,
    loss: LossKind,
    batch_size: usize,
) -> Result<f64> {
    data.validate()?;
    let indices: Vec<usize> = (0..data.len()).collect();
    let mut loss_sum = 0.0;
    let mut elems = 0usize;
    for chunk in indices.chunks(batch_size.max(1)) {
        let (x, y) = data.batch(chunk);
        let out = forward_infer(spec, params, &x)?;
        let (l, _) = loss_and_grad(loss, &out, &y)?;
        loss_sum += l * out.numel() as f64;
        elems += out.numel();
    }
    Ok(loss_sum / elems as f64)
}
