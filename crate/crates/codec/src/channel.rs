//! Memoryless noise channels and received-symbol LLRs.
//!
//! All channels add noise to antipodal symbols. `snr_db` follows the
//! convention `snr = -10 log10(sigma^2)`, so 0 dB means unit noise variance.
//! Reproducibility: every randomized operation takes an explicit RNG, and
//! [`block_rng`] derives an independent ChaCha8 stream from
//! `(master seed, block index)` so results never depend on scheduling or
//! worker count.

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};

use crate::{CodecError, Result};

/// Noise model applied on top of transmitted symbols.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelConfig {
    /// Gaussian noise with standard deviation `sigma`.
    Awgn { sigma: f64 },
    /// Student-t noise with `nu` degrees of freedom, scaled by
    /// `sigma * sqrt((nu - 2) / nu)` so the variance is exactly `sigma^2`.
    /// Requires `nu > 2`.
    StudentT { nu: f64, sigma: f64 },
    /// Gaussian noise plus, independently per symbol with probability
    /// `burst_prob`, an additional Gaussian burst of standard deviation
    /// `burst_sigma`.
    Bursty {
        sigma: f64,
        burst_sigma: f64,
        burst_prob: f64,
    },
    /// Gaussian noise plus a constant `amplitude` added to every symbol of
    /// the trellis step at `position`.
    FixedBurst {
        sigma: f64,
        amplitude: f64,
        position: usize,
    },
}

/// Default burst probability for [`ChannelConfig::Bursty`].
pub const DEFAULT_BURST_PROB: f64 = 0.05;
/// Default burst amplitude for [`ChannelConfig::FixedBurst`].
pub const DEFAULT_BURST_AMPLITUDE: f64 = 5.0;

impl ChannelConfig {
    pub fn sigma(&self) -> f64 {
        match *self {
            ChannelConfig::Awgn { sigma }
            | ChannelConfig::StudentT { sigma, .. }
            | ChannelConfig::Bursty { sigma, .. }
            | ChannelConfig::FixedBurst { sigma, .. } => sigma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sigma = self.sigma();
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(CodecError::InvalidChannel(format!(
                "sigma must be positive and finite, got {sigma}"
            )));
        }
        match *self {
            ChannelConfig::StudentT { nu, .. } => {
                if !(nu > 2.0 && nu.is_finite()) {
                    return Err(CodecError::InvalidChannel(format!(
                        "degrees of freedom must exceed 2, got {nu}"
                    )));
                }
            }
            ChannelConfig::Bursty {
                burst_sigma,
                burst_prob,
                ..
            } => {
                if !(burst_sigma >= 0.0 && burst_sigma.is_finite()) {
                    return Err(CodecError::InvalidChannel(format!(
                        "burst sigma must be nonnegative, got {burst_sigma}"
                    )));
                }
                if !(0.0..=1.0).contains(&burst_prob) {
                    return Err(CodecError::InvalidChannel(format!(
                        "burst probability must lie in [0, 1], got {burst_prob}"
                    )));
                }
            }
            ChannelConfig::FixedBurst { amplitude, .. } => {
                if !amplitude.is_finite() {
                    return Err(CodecError::InvalidChannel(
                        "burst amplitude must be finite".into(),
                    ));
                }
            }
            ChannelConfig::Awgn { .. } => {}
        }
        Ok(())
    }
}

pub fn snr_db_to_sigma(snr_db: f64) -> f64 {
    10.0_f64.powf(-snr_db / 20.0)
}

pub fn sigma_to_snr_db(sigma: f64) -> f64 {
    -20.0 * sigma.log10()
}

/// Independent RNG stream for one simulation block.
///
/// The 256-bit ChaCha8 key is built directly from the two indices, so
/// distinct `(master_seed, block_index)` pairs can never collide and the
/// stream for a block does not depend on how many blocks ran before it.
pub fn block_rng(master_seed: u64, block_index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&block_index.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Sends `symbols` through the channel. `symbols_per_step` is the number of
/// output streams per trellis step (the `n` of the code); it locates the
/// step hit by [`ChannelConfig::FixedBurst`].
pub fn transmit<R: Rng>(
    cfg: &ChannelConfig,
    symbols: &[f64],
    symbols_per_step: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if symbols_per_step == 0 || symbols.len() % symbols_per_step != 0 {
        return Err(CodecError::InvalidInput(format!(
            "symbol count {} is not a multiple of the step width {symbols_per_step}",
            symbols.len()
        )));
    }
    let mut out = Vec::with_capacity(symbols.len());
    match *cfg {
        ChannelConfig::Awgn { sigma } => {
            for &x in symbols {
                let z: f64 = StandardNormal.sample(rng);
                out.push(x + sigma * z);
            }
        }
        ChannelConfig::StudentT { nu, sigma } => {
            let t = StudentT::new(nu).expect("validated above");
            let scale = sigma * ((nu - 2.0) / nu).sqrt();
            for &x in symbols {
                let z: f64 = t.sample(rng);
                out.push(x + scale * z);
            }
        }
        ChannelConfig::Bursty {
            sigma,
            burst_sigma,
            burst_prob,
        } => {
            // burst_prob = 0 draws nothing beyond the Gaussian component, so
            // the output is bit-identical to Awgn under the same RNG state.
            for &x in symbols {
                let z: f64 = StandardNormal.sample(rng);
                let mut y = x + sigma * z;
                if burst_prob > 0.0 {
                    let u: f64 = rng.random();
                    if u < burst_prob {
                        let w: f64 = StandardNormal.sample(rng);
                        y += burst_sigma * w;
                    }
                }
                out.push(y);
            }
        }
        ChannelConfig::FixedBurst {
            sigma,
            amplitude,
            position,
        } => {
            let steps = symbols.len() / symbols_per_step;
            if position >= steps {
                return Err(CodecError::InvalidInput(format!(
                    "burst position {position} outside block of {steps} steps"
                )));
            }
            for &x in symbols {
                let z: f64 = StandardNormal.sample(rng);
                out.push(x + sigma * z);
            }
            let start = position * symbols_per_step;
            for y in &mut out[start..start + symbols_per_step] {
                *y += amplitude;
            }
        }
    }
    Ok(out)
}

/// Per-symbol LLR under the Gaussian noise assumption: `2 y / sigma^2`.
pub fn channel_llr(sigma: f64, received: &[f64]) -> Result<Vec<f64>> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(CodecError::InvalidChannel(format!(
            "sigma must be positive and finite, got {sigma}"
        )));
    }
    let scale = 2.0 / (sigma * sigma);
    Ok(received.iter().map(|&y| scale * y).collect())
}

/// Per-symbol LLR under the exact scaled Student-t noise density, the
/// matched metric for [`ChannelConfig::StudentT`].
pub fn channel_llr_student_t(nu: f64, sigma: f64, received: &[f64]) -> Result<Vec<f64>> {
    ChannelConfig::StudentT { nu, sigma }.validate()?;
    let scale = sigma * ((nu - 2.0) / nu).sqrt();
    let half_exp = (nu + 1.0) / 2.0;
    Ok(received
        .iter()
        .map(|&y| {
            let up = (y - 1.0) / scale;
            let dn = (y + 1.0) / scale;
            half_exp * ((1.0 + dn * dn / nu).ln() - (1.0 + up * up / nu).ln())
        })
        .collect())
}
