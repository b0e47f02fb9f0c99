//! Rate-1/n binary convolutional encoders.
//!
//! A code is a shift register of `memory` bits with an optional feedback
//! (recursive) connection. Each step consumes one message bit `b`, forms the
//! recursion bit `a = b XOR (feedback taps on the state)`, emits one symbol
//! per output stream from taps on `(a, s_1, ..., s_m)`, and shifts the state
//! to `(a, s_1, ..., s_{m-1})`. Symbols are antipodal: bit `x` is sent as
//! `2x - 1`.

use crate::{validate_bits, CodecError, Result};

/// Highest supported register length. Keeps state words comfortably in `u32`
/// and brute-force searches over the state space tractable.
pub const MAX_MEMORY: usize = 16;

/// Description of one rate-1/n convolutional code.
///
/// Tap masks use a fixed bit layout: in `feedback_mask` bit `i` selects state
/// bit `s_{i+1}`; in a generator mask bit 0 selects the recursion bit `a` and
/// bit `i >= 1` selects `s_i`. The oldest state bit is `s_m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvCodeSpec {
    memory: usize,
    feedback_mask: u32,
    generators: Vec<u32>,
    systematic: bool,
    name: String,
}

impl ConvCodeSpec {
    /// Builds a code from internal tap masks, one generator per output
    /// stream. When `systematic` is set the first stream always emits the
    /// message bit; its generator entry is replaced by the mask
    /// `(a, feedback_mask)`, which reproduces `b` exactly because
    /// `a = b XOR (feedback . state)`.
    pub fn new(
        memory: usize,
        feedback_mask: u32,
        generators: Vec<u32>,
        systematic: bool,
    ) -> Result<Self> {
        if memory == 0 || memory > MAX_MEMORY {
            return Err(CodecError::InvalidSpec(format!(
                "memory must be in 1..={MAX_MEMORY}, got {memory}"
            )));
        }
        if generators.is_empty() {
            return Err(CodecError::InvalidSpec(
                "at least one output stream is required".into(),
            ));
        }
        let state_limit = 1u32 << memory;
        if feedback_mask >= state_limit {
            return Err(CodecError::InvalidSpec(format!(
                "feedback mask {feedback_mask:#b} does not fit in {memory} state bits"
            )));
        }
        let gen_limit = 1u32 << (memory + 1);
        let mut generators = generators;
        for (i, g) in generators.iter().enumerate() {
            if *g >= gen_limit {
                return Err(CodecError::InvalidSpec(format!(
                    "generator {i} ({g:#b}) does not fit in {} tap bits",
                    memory + 1
                )));
            }
            if *g == 0 && !(systematic && i == 0) {
                return Err(CodecError::InvalidSpec(format!(
                    "generator {i} has no taps"
                )));
            }
        }
        if systematic {
            generators[0] = 1 | (feedback_mask << 1);
        }
        Ok(Self {
            memory,
            feedback_mask,
            generators,
            systematic,
            name: "custom".into(),
        })
    }

    /// Builds a code from textbook octal polynomials, most significant digit
    /// first, where the top bit taps the current input and lower bits tap
    /// progressively older state bits. `feedback = 0` means no recursion;
    /// a nonzero feedback polynomial must tap the current input.
    pub fn from_octal(
        memory: usize,
        feedback: u32,
        generators: &[u32],
        systematic: bool,
    ) -> Result<Self> {
        if memory == 0 || memory > MAX_MEMORY {
            return Err(CodecError::InvalidSpec(format!(
                "memory must be in 1..={MAX_MEMORY}, got {memory}"
            )));
        }
        let width = memory + 1;
        let feedback_mask = if feedback == 0 {
            0
        } else {
            let rev = reverse_mask(feedback, width)?;
            if rev & 1 == 0 {
                return Err(CodecError::InvalidSpec(format!(
                    "feedback polynomial {feedback:o} (octal) does not tap the current input"
                )));
            }
            rev >> 1
        };
        let internal: Result<Vec<u32>> = generators
            .iter()
            .map(|&g| reverse_mask(g, width))
            .collect();
        Self::new(memory, feedback_mask, internal?, systematic)
    }

    /// Memory-2 recursive systematic code: feedback taps both state bits and
    /// the parity stream taps `(a, s_2)`. Equivalent octal form is (7, 5)
    /// with feedback 7.
    pub fn rsc2() -> Self {
        let mut spec = Self::from_octal(2, 0o7, &[0o7, 0o5], true).expect("valid built-in");
        spec.name = "rsc2".into();
        spec
    }

    /// Classic memory-2 feedforward code with generators (7, 5) octal,
    /// non-systematic.
    pub fn nonrecursive_75() -> Self {
        let mut spec = Self::from_octal(2, 0, &[0o7, 0o5], false).expect("valid built-in");
        spec.name = "conv75".into();
        spec
    }

    /// Memory-3 recursive systematic code with feedback 15 and parity 13
    /// (octal).
    pub fn rsc3() -> Self {
        let mut spec = Self::from_octal(3, 0o15, &[0o15, 0o13], true).expect("valid built-in");
        spec.name = "rsc3".into();
        spec
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn feedback_mask(&self) -> u32 {
        self.feedback_mask
    }

    pub fn generators(&self) -> &[u32] {
        &self.generators
    }

    pub fn is_systematic(&self) -> bool {
        self.systematic
    }

    /// Output symbols per message bit (the `n` of a rate-1/n code).
    pub fn num_streams(&self) -> usize {
        self.generators.len()
    }

    pub fn num_states(&self) -> usize {
        1 << self.memory
    }

    /// Runs one register step: emits one `2x - 1` symbol per stream into
    /// `out` and returns the next state.
    pub(crate) fn step_into(&self, state: u32, bit: u8, out: &mut [f64]) -> u32 {
        debug_assert!(out.len() == self.num_streams());
        let a = u32::from(bit) ^ parity(self.feedback_mask & state);
        let word = a | (state << 1);
        for (slot, &g) in out.iter_mut().zip(&self.generators) {
            *slot = 2.0 * f64::from(parity(g & word)) - 1.0;
        }
        (state << 1 | a) & ((1 << self.memory) - 1)
    }
}

fn parity(word: u32) -> u32 {
    word.count_ones() & 1
}

/// Reverses the low `width` bits of `v`, mapping the textbook
/// input-tap-first polynomial layout onto the internal layout.
fn reverse_mask(v: u32, width: usize) -> Result<u32> {
    if v >= 1 << width {
        return Err(CodecError::InvalidSpec(format!(
            "polynomial {v:o} (octal) does not fit in {width} tap bits"
        )));
    }
    let mut out = 0;
    for i in 0..width {
        if v >> i & 1 == 1 {
            out |= 1 << (width - 1 - i);
        }
    }
    Ok(out)
}

/// Encodes a message block. The register starts in the all-zero state and is
/// not terminated: no tail bits are appended, so the output holds exactly
/// `n * msg.len()` symbols grouped per step as `(stream 1, ..., stream n)`.
pub fn encode_conv(spec: &ConvCodeSpec, msg: &[u8]) -> Result<Vec<f64>> {
    validate_bits(msg)?;
    let n = spec.num_streams();
    let mut out = vec![0.0; n * msg.len()];
    let mut state = 0u32;
    for (k, &bit) in msg.iter().enumerate() {
        state = spec.step_into(state, bit, &mut out[k * n..(k + 1) * n]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rsc2_known_block() {
        // By hand, state (s1, s2), a = b ^ s1 ^ s2, parity = a ^ s2:
        //   k=0: s=(0,0) b=1 -> a=1, sys=+1, parity=1 -> +1, next (1,0)
        //   k=1: s=(1,0) b=0 -> a=1, sys=-1, parity=1 -> +1, next (1,1)
        //   k=2: s=(1,1) b=0 -> a=0, sys=-1, parity=1 -> +1, next (0,1)
        //   k=3: s=(0,1) b=0 -> a=1, sys=-1, parity=0 -> -1, next (1,0)
        let out = encode_conv(&ConvCodeSpec::rsc2(), &[1, 0, 0, 0]).unwrap();
        assert_eq!(out, vec![1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0, -1.0]);
    }

    #[test]
    fn rsc2_impulse_parity_has_period_three() {
        // A single 1 drives the recursive register into the cycle
        // (1,0) -> (1,1) -> (0,1) -> (1,0), so from step 2 onward the parity
        // stream repeats +1, +1, -1.
        let out = encode_conv(&ConvCodeSpec::rsc2(), &[1, 0, 0, 0, 0, 0, 0]).unwrap();
        let parity: Vec<f64> = out.chunks(2).map(|c| c[1]).collect();
        assert_eq!(parity[1..], [1.0, 1.0, -1.0, 1.0, 1.0, -1.0]);
    }

    #[test]
    fn rsc2_parity_equals_b_xor_s1() {
        // Independent recurrence for the same code: track (s1, s2) directly
        // and check parity = b ^ s1 for every length-10 message.
        let spec = ConvCodeSpec::rsc2();
        for m in 0u32..1 << 10 {
            let msg: Vec<u8> = (0..10).map(|k| (m >> (9 - k) & 1) as u8).collect();
            let out = encode_conv(&spec, &msg).unwrap();
            let (mut s1, mut s2) = (0u8, 0u8);
            for (k, &b) in msg.iter().enumerate() {
                let expect = 2.0 * f64::from(b ^ s1) - 1.0;
                assert_eq!(out[2 * k], 2.0 * f64::from(b) - 1.0);
                assert_eq!(out[2 * k + 1], expect, "message {m:#012b} step {k}");
                let a = b ^ s1 ^ s2;
                s2 = s1;
                s1 = a;
            }
        }
    }

    #[test]
    fn systematic_stream_tracks_message() {
        for spec in [ConvCodeSpec::rsc2(), ConvCodeSpec::rsc3()] {
            let msg: Vec<u8> = (0..64).map(|k| (k * 7 % 3 == 0) as u8).collect();
            let out = encode_conv(&spec, &msg).unwrap();
            for (k, &b) in msg.iter().enumerate() {
                assert_eq!(out[k * spec.num_streams()], 2.0 * f64::from(b) - 1.0);
            }
        }
    }

    #[test]
    fn encoding_is_linear_over_gf2() {
        // With the 2x-1 symbol map, xor of messages must match xor of
        // codeword bits for these linear codes.
        let to_bits = |symbols: &[f64]| -> Vec<u8> {
            symbols.iter().map(|&s| (s > 0.0) as u8).collect()
        };
        for spec in [ConvCodeSpec::rsc2(), ConvCodeSpec::nonrecursive_75()] {
            let a: Vec<u8> = (0..64).map(|k| (k % 3 == 1) as u8).collect();
            let b: Vec<u8> = (0..64).map(|k| (k * k % 5 == 2) as u8).collect();
            let ab: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            let ca = to_bits(&encode_conv(&spec, &a).unwrap());
            let cb = to_bits(&encode_conv(&spec, &b).unwrap());
            let cab = to_bits(&encode_conv(&spec, &ab).unwrap());
            let xored: Vec<u8> = ca.iter().zip(&cb).map(|(x, y)| x ^ y).collect();
            assert_eq!(cab, xored, "{}", spec.name());
        }
    }

    #[test]
    fn output_length_is_two_k_for_rate_half() {
        let spec = ConvCodeSpec::rsc2();
        for k in [1usize, 2, 3, 100, 10_000] {
            let msg = vec![1u8; k];
            assert_eq!(encode_conv(&spec, &msg).unwrap().len(), 2 * k);
        }
    }

    #[test]
    fn octal_layout_matches_internal_masks() {
        let spec = ConvCodeSpec::rsc2();
        assert_eq!(spec.memory(), 2);
        assert_eq!(spec.feedback_mask(), 0b11); // taps s1 and s2
        assert_eq!(spec.generators()[1], 0b101); // taps a and s2
        let ff = ConvCodeSpec::nonrecursive_75();
        assert_eq!(ff.generators(), &[0b111, 0b101]);
        let r3 = ConvCodeSpec::rsc3();
        assert_eq!(r3.feedback_mask(), 0b101); // taps s1 and s3
        assert_eq!(r3.generators()[1], 0b1101); // taps a, s2, s3
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(ConvCodeSpec::new(0, 0, vec![1], false).is_err());
        assert!(ConvCodeSpec::new(2, 0b100, vec![1], false).is_err());
        assert!(ConvCodeSpec::new(2, 0, vec![0b10000], false).is_err());
        assert!(ConvCodeSpec::new(2, 0, vec![], false).is_err());
        assert!(ConvCodeSpec::from_octal(2, 0o3, &[0o7], false).is_err()); // no input tap
        assert!(encode_conv(&ConvCodeSpec::rsc2(), &[]).is_err());
        assert!(encode_conv(&ConvCodeSpec::rsc2(), &[2]).is_err());
    }
}
