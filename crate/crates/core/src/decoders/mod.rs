//! SC, SC-flip, SCL and shifted-pruning SCL decoders.
//!
//! Retrying decoders either restart from bit 0 or rewind the SC state to the
//! point returned by [`crate::index::rewind_target`]; both modes produce the
//! same decisions, only the work counters differ.

mod flip;
mod list;
mod oracle;
mod sc;

pub use flip::ScFlipDecoder;
pub use list::{ListPass, SclDecoder, SpSclDecoder};
pub use oracle::{oracle_full_sc, FullMemoryDecoder};
pub use sc::{sc_decode_genie, ScDecoder};

use crate::code::CodeSpec;
use crate::error::Result;
use crate::index::{rewind_target, RewindPlan};

/// Restart policy of the retrying decoders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rewind {
    /// Resume from the earliest bit whose state is still valid.
    #[default]
    Partial,
    /// Every retry starts over at bit 0.
    Restart,
}

impl Rewind {
    pub fn from_flag(partial: bool) -> Self {
        if partial {
            Rewind::Partial
        } else {
            Rewind::Restart
        }
    }

    pub fn is_partial(self) -> bool {
        self == Rewind::Partial
    }
}

/// One decoding pass: the initial decode or a retry.
#[derive(Debug, Clone, PartialEq)]
pub struct Attempt {
    /// Modified bit (flip or shifted pruning); `None` for the initial pass.
    pub target: Option<usize>,
    pub resume: usize,
    pub time_steps: u64,
    pub node_visits: u64,
    pub crc_ok: bool,
}

/// Result of decoding one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    /// Estimate of the full input vector `û`.
    pub decisions: Vec<u8>,
    pub payload: Vec<u8>,
    /// CRC verdict of the returned estimate (always `true` without a CRC).
    pub success: bool,
    pub attempts: u32,
    pub time_steps_total: u64,
    pub time_steps_additional: u64,
    pub node_visits_total: u64,
    pub node_visits_additional: u64,
    pub log: Vec<Attempt>,
}

impl DecodeOutcome {
    pub(crate) fn new(spec: &CodeSpec, decisions: Vec<u8>, success: bool, log: Vec<Attempt>) -> Self {
        let first = log.first().cloned();
        let (ts0, nv0) = first.map_or((0, 0), |a| (a.time_steps, a.node_visits));
        let time_steps_total: u64 = log.iter().map(|a| a.time_steps).sum();
        let node_visits_total: u64 = log.iter().map(|a| a.node_visits).sum();
        Self {
            payload: spec.payload(&decisions),
            decisions,
            success,
            attempts: log.len() as u32,
            time_steps_total,
            time_steps_additional: time_steps_total - ts0,
            node_visits_total,
            node_visits_additional: node_visits_total - nv0,
            log,
        }
    }

    pub fn additional_attempts(&self) -> u32 {
        self.attempts.saturating_sub(1)
    }
}

/// Picks the bits an SC-flip decoder tries, in order.
pub trait FlipStrategy {
    /// `llrs[i]` is the decision LLR of bit `i` in the initial pass.
    fn candidates(&self, spec: &CodeSpec, llrs: &[f64], t_max: usize) -> Vec<usize>;
}

/// Information bits with the smallest `|λ|`, lower index first on ties.
#[derive(Debug, Clone, Copy, Default)]
pub struct LeastReliable;

impl FlipStrategy for LeastReliable {
    fn candidates(&self, spec: &CodeSpec, llrs: &[f64], t_max: usize) -> Vec<usize> {
        let mut bits = spec.info_set().to_vec();
        bits.sort_by(|&a, &b| llrs[a].abs().total_cmp(&llrs[b].abs()).then(a.cmp(&b)));
        bits.truncate(t_max);
        bits
    }
}

/// A fixed list of bits, for tests and debugging.
#[derive(Debug, Clone, Default)]
pub struct FixedFlips(pub Vec<usize>);

impl FlipStrategy for FixedFlips {
    fn candidates(&self, _: &CodeSpec, _: &[f64], t_max: usize) -> Vec<usize> {
        self.0.iter().copied().take(t_max).collect()
    }
}

/// Picks the bits a shifted-pruning list decoder retries, in order.
pub trait ShiftStrategy {
    /// `risks` holds `(bit, margin)` for every information bit where the list was pruned.
    fn positions(&self, spec: &CodeSpec, risks: &[(usize, f64)], t_max: usize) -> Vec<usize>;
}

/// Bits where the best discarded candidate came closest to the worst survivor.
#[derive(Debug, Clone, Copy, Default)]
pub struct SmallestMargin;

impl ShiftStrategy for SmallestMargin {
    fn positions(&self, _: &CodeSpec, risks: &[(usize, f64)], t_max: usize) -> Vec<usize> {
        let mut r = risks.to_vec();
        r.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        r.into_iter().take(t_max).map(|(bit, _)| bit).collect()
    }
}

/// A fixed list of shift positions, for tests and debugging.
#[derive(Debug, Clone, Default)]
pub struct FixedShifts(pub Vec<usize>);

impl ShiftStrategy for FixedShifts {
    fn positions(&self, _: &CodeSpec, _: &[(usize, f64)], t_max: usize) -> Vec<usize> {
        self.0.iter().copied().take(t_max).collect()
    }
}

/// Rewind plan for modifying bit `j` after a complete pass.
pub(crate) fn plan_after_pass(j: usize, n: u32) -> Result<RewindPlan> {
    let last = (1usize << n) - 1;
    if j == last {
        return Ok(RewindPlan {
            target: j,
            resume: j,
            group_start: j,
            iteration: 1,
            prev_resume: None,
        });
    }
    rewind_target(last, j, n)
}

/// Plain SC decoding of one frame.
pub fn sc_decode(spec: &CodeSpec, channel_llrs: &[f64]) -> Result<DecodeOutcome> {
    ScDecoder::new(spec).decode(channel_llrs)
}

/// SC-flip with at most `t_max` retries, lowest-|λ| candidates.
pub fn sc_flip_decode(
    spec: &CodeSpec,
    channel_llrs: &[f64],
    t_max: usize,
    rewind: Rewind,
) -> Result<DecodeOutcome> {
    ScFlipDecoder::new(spec, t_max, rewind).decode(channel_llrs)
}

/// CRC-aided SCL with list size `list`.
pub fn scl_decode(spec: &CodeSpec, channel_llrs: &[f64], list: usize) -> Result<DecodeOutcome> {
    SclDecoder::new(spec, list)?.decode(channel_llrs)
}

/// Shifted-pruning SCL with at most `t_max` retries.
pub fn sp_scl_decode(
    spec: &CodeSpec,
    channel_llrs: &[f64],
    list: usize,
    t_max: usize,
    rewind: Rewind,
) -> Result<DecodeOutcome> {
    SpSclDecoder::new(spec, list, t_max, rewind)?.decode(channel_llrs)
}
