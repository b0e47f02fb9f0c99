//! Viterbi (block maximum-likelihood) decoding.
//!
//! Maximizes the path correlation with the received symbol LLRs, which under
//! Gaussian noise is the minimum-distance codeword. The path starts in state
//! 0 and may end anywhere. Ties keep the first candidate in scan order
//! (states ascending, input 0 before input 1), so an all-zero input decodes
//! to the all-zero message.

use crate::trellis::Trellis;
use crate::{CodecError, Result};

/// Hard decisions plus per-bit soft values.
///
/// Viterbi produces no genuine reliability information, so `soft` holds the
/// sign of each decision (`+1.0` or `-1.0`) to keep the hard/soft contract
/// `bit = 1 iff soft > 0` intact.
#[derive(Debug, Clone)]
pub struct DecodeResult {
    pub bits: Vec<u8>,
    pub soft: Vec<f64>,
}

pub fn viterbi_decode(trellis: &Trellis, symbol_llrs: &[f64]) -> Result<DecodeResult> {
    let n = trellis.num_streams();
    if symbol_llrs.is_empty() || symbol_llrs.len() % n != 0 {
        return Err(CodecError::InvalidInput(format!(
            "symbol LLR count {} is not a positive multiple of {n}",
            symbol_llrs.len()
        )));
    }
    let k = symbol_llrs.len() / n;
    let s = trellis.num_states();

    let mut metric = vec![f64::NEG_INFINITY; s];
    metric[0] = 0.0;
    let mut next_metric = vec![f64::NEG_INFINITY; s];
    // decisions[t * s + to] packs (from_state, input) of the survivor edge.
    let mut decisions = vec![0u32; k * s];

    for t in 0..k {
        next_metric.fill(f64::NEG_INFINITY);
        let lls = &symbol_llrs[t * n..(t + 1) * n];
        for state in 0..s {
            if metric[state] == f64::NEG_INFINITY {
                continue;
            }
            for input in 0..2u8 {
                let mut m = metric[state];
                for (o, l) in trellis.outputs(state, input).iter().zip(lls) {
                    m += f64::from(*o) * l;
                }
                let to = trellis.next(state, input);
                // Strict improvement keeps the earliest (state, input) pair
                // on ties.
                if m > next_metric[to] {
                    next_metric[to] = m;
                    decisions[t * s + to] = (state as u32) << 1 | u32::from(input);
                }
            }
        }
        std::mem::swap(&mut metric, &mut next_metric);
    }

    let mut best = 0usize;
    for state in 1..s {
        if metric[state] > metric[best] {
            best = state;
        }
    }

    let mut bits = vec![0u8; k];
    let mut state = best;
    for t in (0..k).rev() {
        let packed = decisions[t * s + state];
        bits[t] = (packed & 1) as u8;
        state = (packed >> 1) as usize;
    }
    let soft = bits.iter().map(|&b| f64::from(b) * 2.0 - 1.0).collect();
    Ok(DecodeResult { bits, soft })
}
