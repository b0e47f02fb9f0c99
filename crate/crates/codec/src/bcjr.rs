//! Log-domain BCJR (bitwise maximum a posteriori) decoding.
//!
//! The forward pass starts from state 0 (the encoder always does); the
//! backward pass starts uniform because blocks are unterminated. All
//! arithmetic stays in the log domain with the exact Jacobian logarithm
//! `max(a, b) + ln(1 + e^-|a-b|)`, no table approximation, so posteriors
//! match direct summation to floating-point accuracy.

use crate::exhaustive::log_add;
use crate::trellis::Trellis;
use crate::{CodecError, Result};

/// Bitwise posteriors for one block.
#[derive(Debug, Clone)]
pub struct BcjrOutput {
    /// `p(bit = 1 | received)` per message bit.
    pub posterior: Vec<f64>,
    /// `p(bit = 0 | received)`, normalized independently of `posterior`;
    /// the two sum to 1 up to floating-point error.
    pub posterior_complement: Vec<f64>,
    /// Posterior LLR per message bit.
    pub llr: Vec<f64>,
    /// Posterior LLR minus the prior and, for systematic codes, minus the
    /// systematic symbol LLR: the information added by the code structure.
    pub extrinsic: Vec<f64>,
}

/// Decodes one block from per-symbol channel LLRs (length `n * K`) and
/// per-bit prior LLRs (length `K`).
pub fn bcjr_decode(
    trellis: &Trellis,
    symbol_llrs: &[f64],
    prior_llrs: &[f64],
) -> Result<BcjrOutput> {
    let n = trellis.num_streams();
    if symbol_llrs.is_empty() || symbol_llrs.len() % n != 0 {
        return Err(CodecError::InvalidInput(format!(
            "symbol LLR count {} is not a positive multiple of {n}",
            symbol_llrs.len()
        )));
    }
    let k = symbol_llrs.len() / n;
    if prior_llrs.len() != k {
        return Err(CodecError::InvalidInput(format!(
            "{} prior LLRs for block length {k}",
            prior_llrs.len()
        )));
    }
    let s = trellis.num_states();

    // Branch metric for edge (state, u) at step t:
    //   (2u - 1) * prior[t] / 2 + sum_i out_i * symbol_llr[t*n + i] / 2.
    // Terms constant across edges cancel in the posterior ratio.
    let gamma = |t: usize, state: usize, input: u8| -> f64 {
        let sign = f64::from(input) * 2.0 - 1.0;
        let mut g = sign * prior_llrs[t] * 0.5;
        let outs = trellis.outputs(state, input);
        let lls = &symbol_llrs[t * n..(t + 1) * n];
        for (o, l) in outs.iter().zip(lls) {
            g += f64::from(*o) * l * 0.5;
        }
        g
    };

    let mut alpha = vec![f64::NEG_INFINITY; (k + 1) * s];
    alpha[0] = 0.0;
    for t in 0..k {
        let (cur, next) = alpha[t * s..].split_at_mut(s);
        for state in 0..s {
            if cur[state] == f64::NEG_INFINITY {
                continue;
            }
            for input in 0..2u8 {
                let to = trellis.next(state, input);
                let m = cur[state] + gamma(t, state, input);
                next[to] = log_add(next[to], m);
            }
        }
    }

    let mut beta = vec![f64::NEG_INFINITY; (k + 1) * s];
    beta[k * s..].fill(0.0);
    for t in (0..k).rev() {
        for state in 0..s {
            let mut acc = f64::NEG_INFINITY;
            for input in 0..2u8 {
                let to = trellis.next(state, input);
                acc = log_add(acc, gamma(t, state, input) + beta[(t + 1) * s + to]);
            }
            beta[t * s + state] = acc;
        }
    }

    let mut posterior = Vec::with_capacity(k);
    let mut complement = Vec::with_capacity(k);
    let mut llr = Vec::with_capacity(k);
    let mut extrinsic = Vec::with_capacity(k);
    for t in 0..k {
        let mut log1 = f64::NEG_INFINITY;
        let mut log0 = f64::NEG_INFINITY;
        for state in 0..s {
            let a = alpha[t * s + state];
            if a == f64::NEG_INFINITY {
                continue;
            }
            for input in 0..2u8 {
                let to = trellis.next(state, input);
                let m = a + gamma(t, state, input) + beta[(t + 1) * s + to];
                if input == 1 {
                    log1 = log_add(log1, m);
                } else {
                    log0 = log_add(log0, m);
                }
            }
        }
        let denom = log_add(log0, log1);
        posterior.push((log1 - denom).exp());
        complement.push((log0 - denom).exp());
        let l = log1 - log0;
        llr.push(l);
        let sys = if trellis.is_systematic() {
            symbol_llrs[t * n]
        } else {
            0.0
        };
        extrinsic.push(l - prior_llrs[t] - sys);
    }
    Ok(BcjrOutput {
        posterior,
        posterior_complement: complement,
        llr,
        extrinsic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{block_rng, channel_llr, transmit, ChannelConfig};
    use crate::conv::{encode_conv, ConvCodeSpec};
    use approx::assert_relative_eq;

    fn noisy_llrs(spec: &ConvCodeSpec, msg: &[u8], sigma: f64, seed: u64) -> Vec<f64> {
        let clean = encode_conv(spec, msg).unwrap();
        let cfg = ChannelConfig::Awgn { sigma };
        let y = transmit(&cfg, &clean, spec.num_streams(), &mut block_rng(seed, 0)).unwrap();
        channel_llr(sigma, &y).unwrap()
    }

    #[test]
    fn zero_channel_information_returns_the_prior() {
        // With all symbol LLRs zero every path is equally likely given the
        // state sequence, and the bit marginals collapse to the priors.
        let spec = ConvCodeSpec::rsc2();
        let trellis = Trellis::from_spec(&spec);
        let k = 20;
        let priors: Vec<f64> = (0..k).map(|i| ((i as f64) * 0.37).sin() * 3.0).collect();
        let out = bcjr_decode(&trellis, &vec![0.0; 2 * k], &priors).unwrap();
        for (l, p) in out.llr.iter().zip(&priors) {
            assert_relative_eq!(l, p, epsilon = 1e-9);
        }
        // Feeding the posterior back reproduces it: a fixed point.
        let again = bcjr_decode(&trellis, &vec![0.0; 2 * k], &out.llr).unwrap();
        for (l, p) in again.llr.iter().zip(&out.llr) {
            assert_relative_eq!(l, p, epsilon = 1e-9);
        }
    }

    #[test]
    fn posterior_and_complement_sum_to_one() {
        let spec = ConvCodeSpec::rsc2();
        let trellis = Trellis::from_spec(&spec);
        let msg: Vec<u8> = (0..50).map(|i| (i % 3 == 0) as u8).collect();
        let llrs = noisy_llrs(&spec, &msg, 1.0, 17);
        let out = bcjr_decode(&trellis, &llrs, &vec![0.0; 50]).unwrap();
        for (p, q) in out.posterior.iter().zip(&out.posterior_complement) {
            assert!((p + q - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn outputs_stay_finite_in_heavy_noise() {
        let spec = ConvCodeSpec::rsc3();
        let trellis = Trellis::from_spec(&spec);
        let msg: Vec<u8> = (0..100).map(|i| (i % 2) as u8).collect();
        for sigma in [0.1, 0.5, 2.0] {
            let llrs = noisy_llrs(&spec, &msg, sigma, 23);
            let out = bcjr_decode(&trellis, &llrs, &vec![0.0; 100]).unwrap();
            assert!(out.llr.iter().all(|l| l.is_finite()), "sigma {sigma}");
            assert!(out.extrinsic.iter().all(|l| l.is_finite()));
        }
    }

    #[test]
    fn extrinsic_identity_holds() {
        let spec = ConvCodeSpec::rsc2();
        let trellis = Trellis::from_spec(&spec);
        let msg: Vec<u8> = (0..30).map(|i| (i % 5 < 2) as u8).collect();
        let llrs = noisy_llrs(&spec, &msg, 0.9, 5);
        let priors: Vec<f64> = (0..30).map(|i| ((i * i) as f64).sin()).collect();
        let out = bcjr_decode(&trellis, &llrs, &priors).unwrap();
        for t in 0..30 {
            assert_relative_eq!(
                out.extrinsic[t],
                out.llr[t] - priors[t] - llrs[2 * t],
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn rejects_mismatched_lengths() {
        let trellis = Trellis::from_spec(&ConvCodeSpec::rsc2());
        assert!(bcjr_decode(&trellis, &[0.0; 3], &[0.0]).is_err());
        assert!(bcjr_decode(&trellis, &[0.0; 4], &[0.0; 3]).is_err());
        assert!(bcjr_decode(&trellis, &[], &[]).is_err());
    }
}
