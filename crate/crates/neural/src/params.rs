//! Named parameter storage shared by models, gradients, and the optimizer.

use std::collections::HashMap;

use crate::tensor::Tensor;
use crate::{NeuralError, Result};

#[derive(Debug, Clone)]
pub struct Param {
    pub name: String,
    pub tensor: Tensor,
    /// Running batch-norm statistics live here too but are never touched by
    /// the optimizer; they are updated in place during training forwards.
    pub trainable: bool,
}

/// Insertion-ordered so that optimizer state, checkpoints, and gradient
/// traversals all line up without sorting.
#[derive(Debug, Clone, Default)]
pub struct ParameterSet {
    entries: Vec<Param>,
    index: HashMap<String, usize>,
}

impl ParameterSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: &str, tensor: Tensor, trainable: bool) {
        assert!(
            !self.index.contains_key(name),
            "duplicate parameter {name}"
        );
        self.index.insert(name.to_string(), self.entries.len());
        self.entries.push(Param {
            name: name.to_string(),
            tensor,
            trainable,
        });
    }

    pub fn get(&self, name: &str) -> &Tensor {
        let i = self.index[name];
        &self.entries[i].tensor
    }

    pub fn try_get(&self, name: &str) -> Result<&Tensor> {
        self.index
            .get(name)
            .map(|&i| &self.entries[i].tensor)
            .ok_or_else(|| NeuralError::Shape(format!("missing parameter {name}")))
    }

    pub fn get_mut(&mut self, name: &str) -> &mut Tensor {
        let i = self.index[name];
        &mut self.entries[i].tensor
    }

    pub fn entries(&self) -> &[Param] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [Param] {
        &mut self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Same names, shapes, and flags, with every value zero. Gradient buffer.
    pub fn zeros_like(&self) -> ParameterSet {
        let mut out = ParameterSet::new();
        for p in &self.entries {
            out.push(&p.name, Tensor::zeros(p.tensor.shape()), p.trainable);
        }
        out
    }

    pub fn num_trainable_scalars(&self) -> usize {
        self.entries
            .iter()
            .filter(|p| p.trainable)
            .map(|p| p.tensor.numel())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordered_lookup_and_counts() {
        let mut ps = ParameterSet::new();
        ps.push("a.w", Tensor::zeros(&[2, 3]), true);
        ps.push("a.stats", Tensor::zeros(&[3]), false);
        ps.push("b.w", Tensor::zeros(&[4]), true);
        assert_eq!(ps.len(), 3);
        assert_eq!(ps.get("a.w").shape(), &[2, 3]);
        assert_eq!(ps.num_trainable_scalars(), 10);
        let names: Vec<&str> = ps.entries().iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, vec!["a.w", "a.stats", "b.w"]);
        let z = ps.zeros_like();
        assert_eq!(z.len(), 3);
        assert!(!z.entries()[1].trainable);
        assert!(ps.try_get("missing").is_err());
    }

    #[test]
    #[should_panic(expected = "duplicate parameter")]
    fn duplicate_names_panic() {
        let mut ps = ParameterSet::new();
        ps.push("w", Tensor::zeros(&[1]), true);
        ps.push("w", Tensor::zeros(&[1]), true);
    }
}
