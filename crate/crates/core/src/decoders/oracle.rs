//! Reference SC decoder with complete factor-graph storage.
//!
//! Every bit recomputes its whole path through the graph from the channel,
//! with partial sums taken directly from the decision prefix. It shares no
//! scheduling logic with the compact kernel, so it can serve as ground truth
//! for rewinds.

use crate::code::{bit_reverse, block_order, polar_transform, CodeSpec};
use crate::error::{Error, Result};
use crate::kernel::{f_node, g_node, hard_decision};

/// SC decoder keeping all `(n + 1) N` LLRs.
#[derive(Debug, Clone)]
pub struct FullMemoryDecoder {
    n: u32,
    // llr[s * N + b * 2^s + k]: stage s, block b, entry k
    llr: Vec<f64>,
    decisions: Vec<u8>,
    cursor: usize,
}

impl FullMemoryDecoder {
    pub fn new(channel_llrs: &[f64]) -> Result<Self> {
        let n = block_order(channel_llrs.len())?;
        let len = channel_llrs.len();
        let mut llr = vec![0.0; (n as usize + 1) * len];
        for m in 0..len {
            llr[n as usize * len + m] = channel_llrs[bit_reverse(m, n)];
        }
        Ok(Self {
            n,
            llr,
            decisions: vec![0; len],
            cursor: 0,
        })
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn decisions(&self) -> &[u8] {
        &self.decisions
    }

    /// Decision LLR of bit `i`, recomputing every stage on its path.
    pub fn bit_llr(&mut self, i: usize) -> Result<f64> {
        let len = 1usize << self.n;
        if i != self.cursor {
            return Err(Error::Schedule(format!(
                "oracle evaluated bit {i} with cursor at {}",
                self.cursor
            )));
        }
        for s in (0..self.n).rev() {
            let w = 1usize << s;
            let b = i >> s;
            let parent = (s as usize + 1) * len + (b >> 1) * 2 * w;
            let child = s as usize * len + b * w;
            let betas = if b & 1 == 1 {
                let mut v = self.decisions[(b - 1) * w..b * w].to_vec();
                polar_transform(&mut v);
                Some(v)
            } else {
                None
            };
            for k in 0..w {
                let (x, y) = (self.llr[parent + k], self.llr[parent + w + k]);
                self.llr[child + k] = match &betas {
                    Some(v) => g_node(x, y, v[k]),
                    None => f_node(x, y),
                };
            }
        }
        Ok(self.llr[i])
    }

    pub fn commit(&mut self, i: usize, bit: u8) -> Result<()> {
        if i != self.cursor {
            return Err(Error::Schedule(format!(
                "oracle committed bit {i} with cursor at {}",
                self.cursor
            )));
        }
        self.decisions[i] = bit & 1;
        self.cursor += 1;
        Ok(())
    }

    /// Move back to any bit `j` at or before the cursor.
    pub fn rewind(&mut self, j: usize) -> Result<()> {
        if j > self.cursor {
            return Err(Error::InvalidResume {
                resume: j,
                reason: format!("beyond the cursor at {}", self.cursor),
            });
        }
        self.decisions[j..].fill(0);
        self.cursor = j;
        Ok(())
    }

    /// Decode the remaining bits: frozen bits 0, information bits by hard decision
    /// inverted on the bits listed in `flips`.
    pub fn finish(&mut self, spec: &CodeSpec, flips: &[usize]) -> Result<()> {
        for i in self.cursor..spec.block_len() {
            let l = self.bit_llr(i)?;
            let bit = if spec.is_info(i) {
                hard_decision(l) ^ u8::from(flips.contains(&i))
            } else {
                0
            };
            self.commit(i, bit)?;
        }
        Ok(())
    }
}

/// Full-memory SC decode with the listed information bits inverted.
pub fn oracle_full_sc(spec: &CodeSpec, channel_llrs: &[f64], flips: &[usize]) -> Result<Vec<u8>> {
    if channel_llrs.len() != spec.block_len() {
        return Err(Error::LengthMismatch {
            expected: spec.block_len(),
            got: channel_llrs.len(),
        });
    }
    let mut dec = FullMemoryDecoder::new(channel_llrs)?;
    dec.finish(spec, flips)?;
    Ok(dec.decisions().to_vec())
}
