//! Brute-force reference decoders.
//!
//! Both functions enumerate every message of length K and work from the
//! encoder output directly, sharing no machinery with the trellis decoders
//! they are used to validate. Costs grow as `2^K`, so K is capped at 16.

use crate::conv::{encode_conv, ConvCodeSpec};
use crate::{CodecError, Result};

/// Largest block length accepted by the exhaustive decoders.
pub const MAX_EXHAUSTIVE_K: usize = 16;

/// Exact bitwise posterior `p(bit_k = 1 | received)` by direct summation
/// over all `2^K` codewords under Gaussian noise of deviation `sigma` and
/// independent per-bit prior LLRs.
pub fn exhaustive_map_bit(
    spec: &ConvCodeSpec,
    received: &[f64],
    sigma: f64,
    prior_llrs: &[f64],
) -> Result<Vec<f64>> {
    let n = spec.num_streams();
    if received.is_empty() || received.len() % n != 0 {
        return Err(CodecError::InvalidInput(format!(
            "received length {} is not a positive multiple of {n}",
            received.len()
        )));
    }
    let k = received.len() / n;
    if k > MAX_EXHAUSTIVE_K {
        return Err(CodecError::InvalidInput(format!(
            "block length {k} exceeds the exhaustive limit {MAX_EXHAUSTIVE_K}"
        )));
    }
    if prior_llrs.len() != k {
        return Err(CodecError::InvalidInput(format!(
            "{} prior LLRs for block length {k}",
            prior_llrs.len()
        )));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(CodecError::InvalidChannel(format!(
            "sigma must be positive and finite, got {sigma}"
        )));
    }

    // log p(b = 1) and log p(b = 0) per bit, from the prior LLRs.
    let log_p1: Vec<f64> = prior_llrs.iter().map(|&l| -softplus(-l)).collect();
    let log_p0: Vec<f64> = prior_llrs.iter().map(|&l| -softplus(l)).collect();

    let inv_two_var = 1.0 / (2.0 * sigma * sigma);
    let mut log_num1 = vec![f64::NEG_INFINITY; k];
    let mut log_num0 = vec![f64::NEG_INFINITY; k];
    let mut msg = vec![0u8; k];
    for m in 0..1u64 << k {
        for (i, bit) in msg.iter_mut().enumerate() {
            *bit = (m >> (k - 1 - i) & 1) as u8;
        }
        let code = encode_conv(spec, &msg)?;
        let mut log_w = 0.0;
        for (y, c) in received.iter().zip(&code) {
            let d = y - c;
            log_w -= d * d * inv_two_var;
        }
        for (i, &bit) in msg.iter().enumerate() {
            log_w += if bit == 1 { log_p1[i] } else { log_p0[i] };
        }
        for (i, &bit) in msg.iter().enumerate() {
            let acc = if bit == 1 { &mut log_num1[i] } else { &mut log_num0[i] };
            *acc = log_add(*acc, log_w);
        }
    }
    Ok((0..k)
        .map(|i| {
            let denom = log_add(log_num0[i], log_num1[i]);
            (log_num1[i] - denom).exp()
        })
        .collect())
}

/// Exact block maximum-likelihood decoding: the message whose codeword
/// minimizes squared Euclidean distance to `received`. Ties resolve to the
/// lexicographically smallest message (bit 0 preferred, earliest bit first).
pub fn exhaustive_ml_block(spec: &ConvCodeSpec, received: &[f64]) -> Result<Vec<u8>> {
    let n = spec.num_streams();
    if received.is_empty() || received.len() % n != 0 {
        return Err(CodecError::InvalidInput(format!(
            "received length {} is not a positive multiple of {n}",
            received.len()
        )));
    }
    let k = received.len() / n;
    if k > MAX_EXHAUSTIVE_K {
        return Err(CodecError::InvalidInput(format!(
            "block length {k} exceeds the exhaustive limit {MAX_EXHAUSTIVE_K}"
        )));
    }
    let mut best = vec![0u8; k];
    let mut best_dist = f64::INFINITY;
    let mut msg = vec![0u8; k];
    // Enumeration order equals lexicographic message order (bit 0 is the
    // most significant), so strict improvement keeps the smallest tie.
    for m in 0..1u64 << k {
        for (i, bit) in msg.iter_mut().enumerate() {
            *bit = (m >> (k - 1 - i) & 1) as u8;
        }
        let code = encode_conv(spec, &msg)?;
        let dist: f64 = received
            .iter()
            .zip(&code)
            .map(|(y, c)| (y - c) * (y - c))
            .sum();
        if dist < best_dist {
            best_dist = dist;
            best.copy_from_slice(&msg);
        }
    }
    Ok(best)
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `ln(e^a + e^b)` with guards for empty accumulators.
pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn single_bit_posterior_by_hand() {
        // K = 1 on the recursive code: codewords (+1,+1) for bit 1 and
        // (-1,-1) for bit 0. Receiving exactly (+1,+1) at sigma = 1 gives
        // log-likelihood gap 4, so p(1) = 1 / (1 + e^-4).
        let p = exhaustive_map_bit(&ConvCodeSpec::rsc2(), &[1.0, 1.0], 1.0, &[0.0]).unwrap();
        assert_relative_eq!(p[0], 1.0 / (1.0 + (-4.0f64).exp()), epsilon = 1e-12);
        assert_relative_eq!(p[0], 0.9820, epsilon = 1e-4);
    }

    #[test]
    fn posteriors_are_probabilities() {
        let spec = ConvCodeSpec::rsc3();
        let received: Vec<f64> = (0..16).map(|i| ((i * 31 % 17) as f64 - 8.0) / 5.0).collect();
        let priors: Vec<f64> = (0..8).map(|i| (i as f64 - 4.0) / 3.0).collect();
        let p = exhaustive_map_bit(&spec, &received, 0.8, &priors).unwrap();
        assert!(p.iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn strong_prior_pulls_posterior() {
        let spec = ConvCodeSpec::rsc2();
        let received = vec![0.1, -0.2, 0.0, 0.3, -0.1, 0.05];
        let neutral = exhaustive_map_bit(&spec, &received, 1.0, &[0.0; 3]).unwrap();
        let pushed = exhaustive_map_bit(&spec, &received, 1.0, &[6.0, 0.0, 0.0]).unwrap();
        assert!(pushed[0] > neutral[0]);
    }

    #[test]
    fn ml_recovers_noiseless_messages() {
        for spec in [ConvCodeSpec::rsc2(), ConvCodeSpec::nonrecursive_75()] {
            for m in [0u16, 1, 0b101010101010, 0xFFF, 0x0F3] {
                let msg: Vec<u8> = (0..12).map(|i| (m >> (11 - i) & 1) as u8).collect();
                let clean = encode_conv(&spec, &msg).unwrap();
                assert_eq!(exhaustive_ml_block(&spec, &clean).unwrap(), msg);
            }
        }
    }

    #[test]
    fn ml_tie_break_prefers_all_zero() {
        // All-zero received ties every codeword at equal distance.
        let spec = ConvCodeSpec::rsc2();
        let out = exhaustive_ml_block(&spec, &[0.0; 16]).unwrap();
        assert_eq!(out, vec![0u8; 8]);
    }

    #[test]
    fn block_length_cap_enforced() {
        let spec = ConvCodeSpec::rsc2();
        let too_long = vec![0.0; 2 * (MAX_EXHAUSTIVE_K + 1)];
        assert!(exhaustive_ml_block(&spec, &too_long).is_err());
        assert!(exhaustive_map_bit(&spec, &too_long, 1.0, &[0.0; MAX_EXHAUSTIVE_K + 1]).is_err());
    }
}
