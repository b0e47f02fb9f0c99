//! Text configuration for code specifications.
//!
//! Codes load from TOML with textbook octal polynomials:
//!
//! ```toml
//! kind = "turbo"            # or "conv"
//! memory = 2
//! feedback = "7"            # octal; "0" or omitted means feedforward
//! generators = ["7", "5"]   # octal, one per stream; first is ignored
//! systematic = true         #   when systematic
//! interleaver_seed = 7      # turbo only
//! ```

use serde::Deserialize;

use crate::conv::ConvCodeSpec;
use crate::interleave::make_interleaver;
use crate::turbo::TurboCodeSpec;
use crate::{CodecError, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeConfig {
    pub kind: String,
    pub memory: usize,
    #[serde(default)]
    pub feedback: Option<String>,
    pub generators: Vec<String>,
    #[serde(default)]
    pub systematic: bool,
    #[serde(default)]
    pub interleaver_seed: Option<u64>,
}

impl CodeConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: CodeConfig = toml::from_str(text)
            .map_err(|e| CodecError::InvalidSpec(format!("config parse error: {e}")))?;
        match cfg.kind.as_str() {
            "conv" | "turbo" => Ok(cfg),
            other => Err(CodecError::InvalidSpec(format!(
                "unknown code kind {other:?}, expected \"conv\" or \"turbo\""
            ))),
        }
    }

    pub fn is_turbo(&self) -> bool {
        self.kind == "turbo"
    }

    pub fn to_conv_spec(&self) -> Result<ConvCodeSpec> {
        let feedback = match self.feedback.as_deref() {
            None => 0,
            Some(s) => parse_octal(s)?,
        };
        let generators: Result<Vec<u32>> =
            self.generators.iter().map(|s| parse_octal(s)).collect();
        ConvCodeSpec::from_octal(self.memory, feedback, &generators?, self.systematic)
    }

    /// Builds the turbo code for one block length; the interleaver seed
    /// comes from the config (default 0).
    pub fn to_turbo_spec(&self, block_length: usize) -> Result<TurboCodeSpec> {
        if !self.is_turbo() {
            return Err(CodecError::InvalidSpec(
                "config does not describe a turbo code".into(),
            ));
        }
        let seed = self.interleaver_seed.unwrap_or(0);
        TurboCodeSpec::new(self.to_conv_spec()?, make_interleaver(block_length, seed)?)
    }
}

fn parse_octal(s: &str) -> Result<u32> {
    u32::from_str_radix(s.trim(), 8)
        .map_err(|_| CodecError::InvalidSpec(format!("invalid octal polynomial {s:?}")))
}
