//! Convolutional and turbo coding over soft-output channels.
//!
//! The crate covers the full classical pipeline: rate-1/n convolutional
//! encoders described as shift-register machines, a turbo construction with a
//! seeded interleaver, noisy channel models with log-likelihood-ratio (LLR)
//! computation, and trellis decoders (Viterbi, log-domain BCJR, iterative
//! turbo). Brute-force reference decoders are included for cross-checking the
//! trellis implementations on short blocks.
//!
//! Sign conventions used throughout:
//! * bit `b` maps to the channel symbol `2b - 1`, so bit 1 is `+1.0`
//! * an LLR is `log p(bit = 1) - log p(bit = 0)`, so positive favours bit 1

pub mod bcjr;
pub mod channel;
pub mod config;
pub mod conv;
pub mod exhaustive;
pub mod heuristic;
pub mod interleave;
pub mod trellis;
pub mod turbo;
pub mod turbo_dec;
pub mod viterbi;

pub use bcjr::{bcjr_decode, BcjrOutput};
pub use channel::{
    block_rng, channel_llr, channel_llr_student_t, sigma_to_snr_db, snr_db_to_sigma, transmit,
    ChannelConfig,
};
pub use config::CodeConfig;
pub use conv::{encode_conv, ConvCodeSpec};
pub use exhaustive::{exhaustive_map_bit, exhaustive_ml_block};
pub use heuristic::{apply_llr_heuristic, LlrHeuristic};
pub use interleave::{make_interleaver, Interleaver};
pub use trellis::Trellis;
pub use turbo::{encode_turbo, TurboCodeSpec};
pub use turbo_dec::{turbo_decode, TurboDecodeResult, DEFAULT_TURBO_ITERATIONS};
pub use viterbi::{viterbi_decode, DecodeResult};

/// Errors reported by encoding, channel, and decoding operations.
#[derive(Debug, thiserror::Error)]
pub enum CodecError {
    #[error("invalid code specification: {0}")]
    InvalidSpec(String),
    #[error("invalid channel configuration: {0}")]
    InvalidChannel(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, CodecError>;

/// Hard decision per LLR: bit 1 iff the LLR is strictly positive.
///
/// An exact zero is an uninformative tie and decides for bit 0.
pub fn hard_decisions(llrs: &[f64]) -> Vec<u8> {
    llrs.iter().map(|&l| u8::from(l > 0.0)).collect()
}

pub(crate) fn validate_bits(msg: &[u8]) -> Result<()> {
    if msg.is_empty() {
        return Err(CodecError::InvalidInput("message must be nonempty".into()));
    }
    if let Some(&b) = msg.iter().find(|&&b| b > 1) {
        return Err(CodecError::InvalidInput(format!(
            "message bits must be 0 or 1, found {b}"
        )));
    }
    Ok(())
}
