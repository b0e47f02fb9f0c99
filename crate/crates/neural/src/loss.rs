//! Mean squared error and binary cross entropy, averaged over every element.

use serde::{Deserialize, Serialize};

use crate::tensor::Tensor;
use crate::{NeuralError, Result};

/// Predictions this close to 0 or 1 are clamped before the logs in BCE so a
/// saturated sigmoid cannot produce infinities. Gradients are taken at the
/// clamped value.
pub const BCE_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Mse,
    Bce,
}

impl std::str::FromStr for LossKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mse" => Ok(LossKind::Mse),
            "bce" => Ok(LossKind::Bce),
            other => Err(format!("unknown loss {other:?}, expected mse or bce")),
        }
    }
}

/// Returns the scalar loss and its gradient with respect to the predictions.
pub fn loss_and_grad(kind: LossKind, pred: &Tensor, target: &Tensor) -> Result<(f64, Tensor)> {
    if pred.shape() != target.shape() {
        return Err(NeuralError::Shape(format!(
            "prediction {:?} vs target {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    let n = pred.numel() as f64;
    let mut grad = Tensor::zeros(pred.shape());
    let mut loss = 0.0;
    match kind {
        LossKind::Mse => {
            for ((g, &p), &t) in grad.data_mut().iter_mut().zip(pred.data()).zip(target.data()) {
                let d = p - t;
                loss += d * d;
                *g = 2.0 * d / n;
            }
        }
        LossKind::Bce => {
            for ((g, &p), &t) in grad.data_mut().iter_mut().zip(pred.data()).zip(target.data()) {
                let pc = p.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
                loss += -(t * pc.ln() + (1.0 - t) * (1.0 - pc).ln());
                *g = (-t / pc + (1.0 - t) / (1.0 - pc)) / n;
            }
        }
    }
    Ok((loss / n, grad))
}
