//! LLR preprocessing against impulsive noise.
//!
//! Heavy-tailed noise produces received values whose Gaussian-metric LLRs are
//! wildly overconfident. Both heuristics cap that confidence: erasure zeroes
//! any LLR beyond the threshold, saturation clamps it to the threshold.

use crate::{CodecError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LlrHeuristic {
    None,
    /// `|llr| > threshold` becomes 0.
    Erasure { threshold: f64 },
    /// `llr` is clamped into `[-threshold, threshold]`.
    Saturation { threshold: f64 },
}

impl LlrHeuristic {
    fn threshold(&self) -> Option<f64> {
        match *self {
            LlrHeuristic::None => None,
            LlrHeuristic::Erasure { threshold } | LlrHeuristic::Saturation { threshold } => {
                Some(threshold)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.threshold() {
            // +infinity is allowed and makes the heuristic a no-op.
            if !(t > 0.0) {
                return Err(CodecError::InvalidInput(format!(
                    "threshold must be positive, got {t}"
                )));
            }
        }
        Ok(())
    }
}

pub fn apply_llr_heuristic(heuristic: &LlrHeuristic, llrs: &[f64]) -> Result<Vec<f64>> {
    heuristic.validate()?;
    Ok(match *heuristic {
        LlrHeuristic::None => llrs.to_vec(),
        LlrHeuristic::Erasure { threshold } => llrs
            .iter()
            .map(|&l| if l.abs() > threshold { 0.0 } else { l })
            .collect(),
        LlrHeuristic::Saturation { threshold } => llrs
            .iter()
            .map(|&l| l.clamp(-threshold, threshold))
            .collect(),
    })
}
