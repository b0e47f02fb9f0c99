//! Seeded index permutations.
//!
//! The permutation is a Fisher-Yates shuffle driven by a SplitMix64 stream,
//! chosen so that a `(length, seed)` pair pins the exact permutation without
//! reference to any external RNG implementation. Draws use `next % (i + 1)`;
//! the modulo bias is below `len / 2^64` and irrelevant at block lengths this
//! crate handles.

use crate::{CodecError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    forward: Vec<u32>,
}

/// Builds the permutation for block length `len` from `seed`.
pub fn make_interleaver(len: usize, seed: u64) -> Result<Interleaver> {
    if len == 0 {
        return Err(CodecError::InvalidSpec(
            "interleaver length must be at least 1".into(),
        ));
    }
    if len > u32::MAX as usize {
        return Err(CodecError::InvalidSpec(format!(
            "interleaver length {len} too large"
        )));
    }
    let mut forward: Vec<u32> = (0..len as u32).collect();
    let mut state = seed;
    for i in (1..len).rev() {
        let j = (splitmix64(&mut state) % (i as u64 + 1)) as usize;
        forward.swap(i, j);
    }
    Ok(Interleaver { forward })
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

impl Interleaver {
    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// Identity permutation, useful for degenerate turbo constructions.
    pub fn identity(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(CodecError::InvalidSpec(
                "interleaver length must be at least 1".into(),
            ));
        }
        Ok(Self {
            forward: (0..len as u32).collect(),
        })
    }

    pub fn permutation(&self) -> &[u32] {
        &self.forward
    }

    /// `out[i] = x[perm[i]]`.
    pub fn interleave<T: Copy>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.forward.len(), "length mismatch");
        self.forward.iter().map(|&p| x[p as usize]).collect()
    }

    /// Inverse of [`interleave`](Self::interleave).
    pub fn deinterleave<T: Copy + Default>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.forward.len(), "length mismatch");
        let mut out = vec![T::default(); x.len()];
        for (i, &p) in self.forward.iter().enumerate() {
            out[p as usize] = x[i];
        }
        out
    }
}
