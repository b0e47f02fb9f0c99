//! Parallel-concatenated (turbo) encoding.
//!
//! Two identical rate-1/2 systematic component encoders run on the message
//! and on its interleaved copy. The second encoder's systematic stream is
//! redundant and dropped, giving rate 1/3 with per-step symbol triplets
//! `(systematic, parity 1, parity 2)`. Both registers start in state 0 and
//! are left unterminated.

use crate::conv::{encode_conv, ConvCodeSpec};
use crate::interleave::{make_interleaver, Interleaver};
use crate::{CodecError, Result};

#[derive(Debug, Clone)]
pub struct TurboCodeSpec {
    component: ConvCodeSpec,
    interleaver: Interleaver,
    name: String,
}

impl TurboCodeSpec {
    pub fn new(component: ConvCodeSpec, interleaver: Interleaver) -> Result<Self> {
        if !component.is_systematic() {
            return Err(CodecError::InvalidSpec(
                "turbo component must be systematic".into(),
            ));
        }
        if component.num_streams() != 2 {
            return Err(CodecError::InvalidSpec(format!(
                "turbo component must be rate 1/2, got 1/{}",
                component.num_streams()
            )));
        }
        let name = format!("turbo-{}", component.name());
        Ok(Self {
            component,
            interleaver,
            name,
        })
    }

    /// Standard construction: the memory-2 recursive systematic component
    /// and a seeded random interleaver of length `block_length`.
    pub fn default_rsc2(block_length: usize, interleaver_seed: u64) -> Result<Self> {
        Self::new(
            ConvCodeSpec::rsc2(),
            make_interleaver(block_length, interleaver_seed)?,
        )
    }

    pub fn component(&self) -> &ConvCodeSpec {
        &self.component
    }

    pub fn interleaver(&self) -> &Interleaver {
        &self.interleaver
    }

    pub fn block_length(&self) -> usize {
        self.interleaver.len()
    }

    /// Symbols per message bit (3 for this rate-1/3 construction).
    pub fn num_streams(&self) -> usize {
        3
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

/// Encodes one block; `msg` length must equal the interleaver length.
pub fn encode_turbo(spec: &TurboCodeSpec, msg: &[u8]) -> Result<Vec<f64>> {
    if msg.len() != spec.block_length() {
        return Err(CodecError::InvalidInput(format!(
            "message length {} does not match interleaver length {}",
            msg.len(),
            spec.block_length()
        )));
    }
    let first = encode_conv(&spec.component, msg)?;
    let permuted = spec.interleaver.interleave(msg);
    let second = encode_conv(&spec.component, &permuted)?;
    let mut out = Vec::with_capacity(3 * msg.len());
    for k in 0..msg.len() {
        out.push(first[2 * k]);
        out.push(first[2 * k + 1]);
        out.push(second[2 * k + 1]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(k: usize) -> Vec<u8> {
        (0..k).map(|i| (i * 5 % 7 < 3) as u8).collect()
    }

    #[test]
    fn stream_layout_and_rate() {
        let spec = TurboCodeSpec::default_rsc2(40, 11).unwrap();
        let msg = bits(40);
        let out = encode_turbo(&spec, &msg).unwrap();
        assert_eq!(out.len(), 3 * msg.len());

        let first = encode_conv(spec.component(), &msg).unwrap();
        let second =
            encode_conv(spec.component(), &spec.interleaver().interleave(&msg)).unwrap();
        for k in 0..msg.len() {
            assert_eq!(out[3 * k], 2.0 * f64::from(msg[k]) - 1.0);
            assert_eq!(out[3 * k + 1], first[2 * k + 1]);
            assert_eq!(out[3 * k + 2], second[2 * k + 1]);
        }
    }

    #[test]
    fn identity_interleaver_duplicates_parity() {
        let spec =
            TurboCodeSpec::new(ConvCodeSpec::rsc2(), Interleaver::identity(16).unwrap()).unwrap();
        let out = encode_turbo(&spec, &bits(16)).unwrap();
        for k in 0..16 {
            assert_eq!(out[3 * k + 1], out[3 * k + 2]);
        }
    }

    #[test]
    fn single_bit_block() {
        let spec = TurboCodeSpec::default_rsc2(1, 0).unwrap();
        assert_eq!(encode_turbo(&spec, &[1]).unwrap(), vec![1.0, 1.0, 1.0]);
        assert_eq!(encode_turbo(&spec, &[0]).unwrap(), vec![-1.0, -1.0, -1.0]);
    }

    #[test]
    fn rejects_bad_component_and_length() {
        let not_sys = ConvCodeSpec::nonrecursive_75();
        assert!(TurboCodeSpec::new(not_sys, Interleaver::identity(4).unwrap()).is_err());
        let spec = TurboCodeSpec::default_rsc2(8, 1).unwrap();
        assert!(encode_turbo(&spec, &bits(9)).is_err());
    }
}
