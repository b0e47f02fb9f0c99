//! Iterative turbo decoding.
//!
//! Each full iteration runs the BCJR over component 1 (systematic + parity 1)
//! and then over component 2 (interleaved systematic + parity 2), passing
//! extrinsic information as the other component's prior. The optional LLR
//! heuristic is applied to the channel symbol LLRs feeding the iterations,
//! never to extrinsics. The final hard decision comes from the full
//! posterior of the last component pass, deinterleaved.

use crate::bcjr::bcjr_decode;
use crate::hard_decisions;
use crate::heuristic::{apply_llr_heuristic, LlrHeuristic};
use crate::trellis::Trellis;
use crate::turbo::TurboCodeSpec;
use crate::{CodecError, Result};

/// Full iterations (component-1 plus component-2 passes) run by default.
pub const DEFAULT_TURBO_ITERATIONS: usize = 6;

/// One component decoding, recorded in that component's own bit order
/// (component 2 sees the interleaved message).
#[derive(Debug, Clone)]
pub struct ComponentTrace {
    /// 1 or 2.
    pub component: u8,
    /// Prior LLRs fed to this pass.
    pub prior: Vec<f64>,
    /// Posterior LLRs produced by this pass.
    pub posterior_llr: Vec<f64>,
    /// Posterior probabilities `p(bit = 1)` produced by this pass.
    pub posterior_p: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TurboDecodeResult {
    pub bits: Vec<u8>,
    /// Final posterior LLRs in message order.
    pub llr: Vec<f64>,
    /// Posterior LLRs after every component pass, all in message order
    /// (component-2 entries are deinterleaved). Two entries per iteration.
    pub iteration_llrs: Vec<Vec<f64>>,
    /// Raw per-pass records for teacher-data capture.
    pub traces: Vec<ComponentTrace>,
}

/// Decodes one block from the `3 * K` channel symbol LLRs laid out as
/// per-step triplets `(systematic, parity 1, parity 2)`.
pub fn turbo_decode(
    spec: &TurboCodeSpec,
    symbol_llrs: &[f64],
    iterations: usize,
    heuristic: &LlrHeuristic,
) -> Result<TurboDecodeResult> {
    let k = spec.block_length();
    if symbol_llrs.len() != 3 * k {
        return Err(CodecError::InvalidInput(format!(
            "expected {} symbol LLRs for block length {k}, got {}",
            3 * k,
            symbol_llrs.len()
        )));
    }
    if iterations == 0 {
        return Err(CodecError::InvalidInput(
            "at least one iteration is required".into(),
        ));
    }
    let symbol_llrs = apply_llr_heuristic(heuristic, symbol_llrs)?;

    let mut sys = Vec::with_capacity(k);
    let mut par1 = Vec::with_capacity(k);
    let mut par2 = Vec::with_capacity(k);
    for t in 0..k {
        sys.push(symbol_llrs[3 * t]);
        par1.push(symbol_llrs[3 * t + 1]);
        par2.push(symbol_llrs[3 * t + 2]);
    }
    let pi = spec.interleaver();
    let sys_i = pi.interleave(&sys);

    let mut stream1 = vec![0.0; 2 * k];
    let mut stream2 = vec![0.0; 2 * k];
    for t in 0..k {
        stream1[2 * t] = sys[t];
        stream1[2 * t + 1] = par1[t];
        stream2[2 * t] = sys_i[t];
        stream2[2 * t + 1] = par2[t];
    }

    let trellis = Trellis::from_spec(spec.component());
    let mut prior1 = vec![0.0; k];
    let mut traces = Vec::with_capacity(2 * iterations);
    let mut iteration_llrs = Vec::with_capacity(2 * iterations);
    let mut final_llr = vec![0.0; k];
    for _ in 0..iterations {
        let out1 = bcjr_decode(&trellis, &stream1, &prior1)?;
        traces.push(ComponentTrace {
            component: 1,
            prior: prior1.clone(),
            posterior_llr: out1.llr.clone(),
            posterior_p: out1.posterior.clone(),
        });
        iteration_llrs.push(out1.llr.clone());

        let prior2 = pi.interleave(&out1.extrinsic);
        let out2 = bcjr_decode(&trellis, &stream2, &prior2)?;
        traces.push(ComponentTrace {
            component: 2,
            prior: prior2,
            posterior_llr: out2.llr.clone(),
            posterior_p: out2.posterior.clone(),
        });
        final_llr = pi.deinterleave(&out2.llr);
        iteration_llrs.push(final_llr.clone());

        prior1 = pi.deinterleave(&out2.extrinsic);
    }

    Ok(TurboDecodeResult {
        bits: hard_decisions(&final_llr),
        llr: final_llr,
        iteration_llrs,
        traces,
    })
}
