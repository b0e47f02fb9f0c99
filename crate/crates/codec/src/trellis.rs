//! Trellis expansion of a convolutional code.
//!
//! One trellis section lists, for every `(state, input)` pair, the successor
//! state and the antipodal output symbols. Decoders walk this table instead
//! of re-deriving register logic.

use crate::conv::ConvCodeSpec;

#[derive(Debug, Clone)]
pub struct Trellis {
    num_states: usize,
    num_streams: usize,
    systematic: bool,
    /// Indexed by `state * 2 + input`.
    next_state: Vec<u32>,
    /// Indexed by `(state * 2 + input) * num_streams`, symbols in `{-1, +1}`.
    outputs: Vec<i8>,
}

impl Trellis {
    pub fn from_spec(spec: &ConvCodeSpec) -> Self {
        let num_states = spec.num_states();
        let n = spec.num_streams();
        let mut next_state = vec![0u32; num_states * 2];
        let mut outputs = vec![0i8; num_states * 2 * n];
        let mut symbols = vec![0.0; n];
        for state in 0..num_states as u32 {
            for input in 0..2u8 {
                let edge = state as usize * 2 + input as usize;
                next_state[edge] = spec.step_into(state, input, &mut symbols);
                for (i, &s) in symbols.iter().enumerate() {
                    outputs[edge * n + i] = s as i8;
                }
            }
        }
        Self {
            num_states,
            num_streams: n,
            systematic: spec.is_systematic(),
            next_state,
            outputs,
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_streams(&self) -> usize {
        self.num_streams
    }

    pub fn is_systematic(&self) -> bool {
        self.systematic
    }

    pub fn next(&self, state: usize, input: u8) -> usize {
        self.next_state[state * 2 + input as usize] as usize
    }

    /// Output symbols on the edge `(state, input)`, one per stream.
    pub fn outputs(&self, state: usize, input: u8) -> &[i8] {
        let edge = state * 2 + input as usize;
        &self.outputs[edge * self.num_streams..(edge + 1) * self.num_streams]
    }
}
