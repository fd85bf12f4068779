use super::{Attempt, DecodeOutcome};
use crate::code::CodeSpec;
use crate::error::{Error, Result};
use crate::kernel::{hard_decision, ScMemory};

/// Decode from the memory's cursor to the last bit.
///
/// Frozen bits are set to 0, information bits to their hard decision,
/// inverted at `flip`. Decision LLRs are written to `llrs` when given.
pub(crate) fn sc_pass(
    spec: &CodeSpec,
    mem: &mut ScMemory,
    flip: Option<usize>,
    mut llrs: Option<&mut [f64]>,
) -> Result<()> {
    for i in mem.cursor()..spec.block_len() {
        let l = mem.bit_llr(i)?;
        if let Some(out) = llrs.as_deref_mut() {
            out[i] = l;
        }
        let bit = if spec.is_info(i) {
            hard_decision(l) ^ u8::from(flip == Some(i))
        } else {
            0
        };
        mem.commit(i, bit)?;
    }
    Ok(())
}

/// SC decoder reusing one compact memory across frames.
#[derive(Debug, Clone)]
pub struct ScDecoder<'a> {
    spec: &'a CodeSpec,
    mem: ScMemory,
}

impl<'a> ScDecoder<'a> {
    pub fn new(spec: &'a CodeSpec) -> Self {
        Self {
            spec,
            mem: ScMemory::new(spec.order()),
        }
    }

    pub fn decode(&mut self, channel_llrs: &[f64]) -> Result<DecodeOutcome> {
        self.mem.load(channel_llrs)?;
        sc_pass(self.spec, &mut self.mem, None, None)?;
        let decisions = self.mem.decisions().to_vec();
        let ok = self.spec.crc_ok(&decisions);
        let c = self.mem.counters();
        let log = vec![Attempt {
            target: None,
            resume: 0,
            time_steps: c.time_steps,
            node_visits: c.node_visits,
            crc_ok: ok,
        }];
        Ok(DecodeOutcome::new(self.spec, decisions, ok, log))
    }

    /// Genie-aided SC: the true input `u` is fed back after every bit, and
    /// the reported estimate holds the decoder's own hard decisions.
    pub fn decode_genie(&mut self, channel_llrs: &[f64], u: &[u8]) -> Result<DecodeOutcome> {
        let len = self.spec.block_len();
        if u.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                got: u.len(),
            });
        }
        self.mem.load(channel_llrs)?;
        let mut decisions = vec![0u8; len];
        for i in 0..len {
            let l = self.mem.bit_llr(i)?;
            if self.spec.is_info(i) {
                decisions[i] = hard_decision(l);
            }
            self.mem.commit(i, u[i])?;
        }
        let ok = self.spec.crc_ok(&decisions);
        let c = self.mem.counters();
        let log = vec![Attempt {
            target: None,
            resume: 0,
            time_steps: c.time_steps,
            node_visits: c.node_visits,
            crc_ok: ok,
        }];
        Ok(DecodeOutcome::new(self.spec, decisions, ok, log))
    }
}

pub fn sc_decode_genie(spec: &CodeSpec, channel_llrs: &[f64], u: &[u8]) -> Result<DecodeOutcome> {
    ScDecoder::new(spec).decode_genie(channel_llrs, u)
}
