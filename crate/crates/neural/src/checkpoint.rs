//! Versioned JSON checkpoints holding a model spec and its parameters.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{param_layout, ModelSpec};
use crate::params::ParameterSet;
use crate::tensor::Tensor;
use crate::{NeuralError, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SavedParam {
    name: String,
    shape: Vec<usize>,
    trainable: bool,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    version: u32,
    spec: ModelSpec,
    params: Vec<SavedParam>,
}

pub fn checkpoint_to_string(spec: &ModelSpec, params: &ParameterSet) -> Result<String> {
    let ck = Checkpoint {
        version: CHECKPOINT_VERSION,
        spec: spec.clone(),
        params: params
            .entries()
            .iter()
            .map(|p| SavedParam {
                name: p.name.clone(),
                shape: p.tensor.shape().to_vec(),
                trainable: p.trainable,
                data: p.tensor.data().to_vec(),
            })
            .collect(),
    };
    Ok(serde_json::to_string(&ck)?)
}

/// Parses and validates a checkpoint. The saved parameters must match the
/// spec's own layout name for name and shape for shape, so a truncated or
/// hand-edited file cannot load into a misshapen model.
pub fn checkpoint_from_str(text: &str) -> Result<(ModelSpec, ParameterSet)> {
    let ck: Checkpoint = serde_json::from_str(text)?;
    if ck.version != CHECKPOINT_VERSION {
        return Err(NeuralError::Checkpoint(format!(
            "version {} unsupported, this build reads {}",
            ck.version, CHECKPOINT_VERSION
        )));
    }
    let layout = param_layout(&ck.spec)?;
    if layout.len() != ck.params.len() {
        return Err(NeuralError::Checkpoint(format!(
            "{} parameters saved, spec defines {}",
            ck.params.len(),
            layout.len()
        )));
    }
    let mut params = ParameterSet::new();
    for ((name, shape, trainable), saved) in layout.into_iter().zip(ck.params) {
        if saved.name != name || saved.shape != shape || saved.trainable != trainable {
            return Err(NeuralError::Checkpoint(format!(
                "parameter {} does not match the spec layout entry {}",
                saved.name, name
            )));
        }
        let tensor = Tensor::from_vec(&shape, saved.data)
            .map_err(|_| NeuralError::Checkpoint(format!("bad data length for {name}")))?;
        params.push(&name, tensor, trainable);
    }
    Ok((ck.spec, params))
}

pub fn save_checkpoint(path: &Path, spec: &ModelSpec, params: &ParameterSet) -> Result<()> {
    std::fs::write(path, checkpoint_to_string(spec, params)?)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<(ModelSpec, ParameterSet)> {
    checkpoint_from_str(&std::fs::read_to_string(path)?)
}
