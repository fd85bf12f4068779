//! Memory-efficient successive-cancellation core.
//!
//! Stage `s` of the factor graph holds `2^s` LLRs; stage `n` holds the `N`
//! channel LLRs. All stages live in one buffer of `2N - 1` slots, stage `s` at
//! offset `2^s - 1`. Partial sums use the same offsets for stages `0..n`, in
//! `N - 1` bits.
//!
//! Decoding bit `i` refreshes stages `eta(i)` down to `0`; committing bit `i`
//! rewrites the partial sums of stage `psi(i)` only. Every write is stamped
//! with the bit that made it, so a rewind can be checked against the state
//! actually left in memory.

mod pool;

pub use pool::PathPool;

use crate::code::{bit_reverse, block_order, polar_transform};
use crate::error::{Error, Result};
use crate::index::{eta, psi};

/// Min-sum check-node update: `sgn(a) sgn(b) min(|a|, |b|)`, with `sgn(0) = +1`.
#[inline]
pub fn f_node(la: f64, lb: f64) -> f64 {
    let m = la.abs().min(lb.abs());
    if (la < 0.0) != (lb < 0.0) {
        -m
    } else {
        m
    }
}

/// Variable-node update: `(-1)^beta la + lb`.
#[inline]
pub fn g_node(la: f64, lb: f64, beta: u8) -> f64 {
    if beta & 1 == 0 {
        lb + la
    } else {
        lb - la
    }
}

/// Hard decision `h(λ)`: 1 for negative LLRs, 0 otherwise.
#[inline]
pub fn hard_decision(llr: f64) -> u8 {
    u8::from(llr < 0.0)
}

#[inline]
pub(crate) fn stage_offset(s: u32) -> usize {
    (1usize << s) - 1
}

/// Compute a child stage from its parent: f nodes, or g nodes when partial sums are given.
#[inline]
pub(crate) fn update_stage(parent: &[f64], child: &mut [f64], betas: Option<&[u8]>) {
    let (a, b) = parent.split_at(child.len());
    match betas {
        None => {
            for ((c, &x), &y) in child.iter_mut().zip(a).zip(b) {
                *c = f_node(x, y);
            }
        }
        Some(betas) => {
            for (((c, &x), &y), &beta) in child.iter_mut().zip(a).zip(b).zip(betas) {
                *c = g_node(x, y, beta);
            }
        }
    }
}

/// Fold a just-decided bit into the stage-`t` partial sums, reading stages `0..t`.
///
/// `target` is the stage-`t` buffer (`2^t` bits), `lower(s)` the stage-`s` buffer.
#[inline]
pub(crate) fn fan_out<'a>(target: &mut [u8], bit: u8, t: u32, lower: impl Fn(u32) -> &'a [u8]) {
    target[0] = bit;
    for s in 0..t {
        let h = 1usize << s;
        let src = lower(s);
        let (lo, hi) = target[..2 * h].split_at_mut(h);
        for ((l, r), &b) in lo.iter_mut().zip(hi.iter_mut()).zip(src) {
            *r = *l;
            *l ^= b;
        }
    }
}

/// Work counters of an SC pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    /// One step per refreshed stage.
    pub time_steps: u64,
    /// One visit per f or g evaluation.
    pub node_visits: u64,
}

impl std::ops::AddAssign for Counters {
    fn add_assign(&mut self, rhs: Self) {
        self.time_steps += rhs.time_steps;
        self.node_visits += rhs.node_visits;
    }
}

/// Decision prefix `û[0..N/2]` (and a path metric) captured once bit `N/2 - 1` is committed.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub decisions_prefix: Vec<u8>,
    pub metric: f64,
    pub taken_at: usize,
}

const UNKNOWN: usize = usize::MAX;

/// Compact single-path SC state: `2N - 1` LLRs, `N - 1` partial sums, `N` decisions.
#[derive(Debug, Clone)]
pub struct ScMemory {
    n: u32,
    llr: Vec<f64>,
    psum: Vec<u8>,
    decisions: Vec<u8>,
    cursor: usize,
    evaluated: Option<usize>,
    // Bit whose decoding last wrote each stage; UNKNOWN when not derivable.
    llr_stamp: Vec<usize>,
    psum_stamp: Vec<usize>,
    counters: Counters,
}

impl ScMemory {
    /// An all-zero state for block length `2^n`; load channel LLRs with [`ScMemory::load`].
    pub fn new(n: u32) -> Self {
        let len = 1usize << n;
        Self {
            n,
            llr: vec![0.0; 2 * len - 1],
            psum: vec![0; len - 1],
            decisions: vec![0; len],
            cursor: 0,
            evaluated: None,
            llr_stamp: vec![UNKNOWN; n as usize],
            psum_stamp: vec![UNKNOWN; n as usize],
            counters: Counters::default(),
        }
    }

    /// Fresh state for the given channel LLRs (channel order, as produced by the channel).
    pub fn init(channel_llrs: &[f64]) -> Result<Self> {
        let n = block_order(channel_llrs.len())?;
        let mut mem = Self::new(n);
        mem.load(channel_llrs)?;
        Ok(mem)
    }

    /// Reset to bit 0 with new channel LLRs, reusing the allocation.
    pub fn load(&mut self, channel_llrs: &[f64]) -> Result<()> {
        let len = self.block_len();
        if channel_llrs.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                got: channel_llrs.len(),
            });
        }
        let n = self.n;
        let channel = &mut self.llr[stage_offset(n)..];
        for (m, slot) in channel.iter_mut().enumerate() {
            *slot = channel_llrs[bit_reverse(m, n)];
        }
        self.decisions.fill(0);
        self.cursor = 0;
        self.evaluated = None;
        self.llr_stamp.fill(UNKNOWN);
        self.psum_stamp.fill(UNKNOWN);
        self.counters = Counters::default();
        Ok(())
    }

    pub fn order(&self) -> u32 {
        self.n
    }

    pub fn block_len(&self) -> usize {
        1 << self.n
    }

    /// Next bit to decode.
    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn decisions(&self) -> &[u8] {
        &self.decisions
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn reset_counters(&mut self) {
        self.counters = Counters::default();
    }

    pub fn llr_capacity(&self) -> usize {
        self.llr.len()
    }

    pub fn psum_capacity(&self) -> usize {
        self.psum.len()
    }

    /// The `2^s` LLRs of stage `s` (stage `n` is the channel in decoder order).
    pub fn llr_stage(&self, s: u32) -> &[f64] {
        let off = stage_offset(s);
        &self.llr[off..off + (1 << s)]
    }

    /// The `2^s` partial sums of stage `s < n`.
    pub fn psum_stage(&self, s: u32) -> &[u8] {
        let off = stage_offset(s);
        &self.psum[off..off + (1 << s)]
    }

    /// Bit that last wrote the stage-`s` partial sums, if known.
    pub fn psum_written_at(&self, s: u32) -> Option<usize> {
        let v = self.psum_stamp[s as usize];
        (v != UNKNOWN).then_some(v)
    }

    /// Bit that last wrote the stage-`s` LLRs, if known (`None` for the channel stage).
    pub fn llr_written_at(&self, s: u32) -> Option<usize> {
        if s == self.n {
            return None;
        }
        let v = self.llr_stamp[s as usize];
        (v != UNKNOWN).then_some(v)
    }

    /// Decision LLR of bit `i`, refreshing stages `eta(i)` down to 0.
    pub fn bit_llr(&mut self, i: usize) -> Result<f64> {
        if i != self.cursor || i >= self.block_len() {
            return Err(Error::Schedule(format!(
                "bit_llr({i}) called with cursor at {}",
                self.cursor
            )));
        }
        let n = self.n;
        let top = eta(i, n);
        debug_assert!(
            i == 0 || self.psum_stamp[top as usize] == i - 1,
            "stage-{top} partial sums for bit {i} were not written by bit {}",
            i - 1
        );
        for s in (0..=top).rev() {
            let (lower, upper) = self.llr.split_at_mut(stage_offset(s + 1));
            let parent = &upper[..2 << s];
            let child = &mut lower[stage_offset(s)..];
            // Only the entry stage can hold g nodes: below eta(i) every bit of i is zero.
            let betas = if (i >> s) & 1 == 1 {
                let off = stage_offset(s);
                Some(&self.psum[off..off + (1 << s)])
            } else {
                None
            };
            update_stage(parent, child, betas);
            self.llr_stamp[s as usize] = i;
        }
        self.counters.time_steps += u64::from(top) + 1;
        self.counters.node_visits += (2u64 << top) - 1;
        self.evaluated = Some(i);
        Ok(self.llr[0])
    }

    /// Record decision `bit` for bit `i` and fold it into the partial sums.
    pub fn commit(&mut self, i: usize, bit: u8) -> Result<()> {
        if self.evaluated != Some(i) || self.cursor != i {
            return Err(Error::Schedule(format!(
                "commit({i}) without a preceding bit_llr({i}) (cursor {})",
                self.cursor
            )));
        }
        let bit = bit & 1;
        self.decisions[i] = bit;
        self.cursor = i + 1;
        self.evaluated = None;
        if let Some(t) = psi(i, self.n) {
            let (lower, upper) = self.psum.split_at_mut(stage_offset(t));
            let target = &mut upper[..1 << t];
            let lower = &*lower;
            fan_out(target, bit, t, |s| {
                let off = stage_offset(s);
                &lower[off..off + (1 << s)]
            });
            self.psum_stamp[t as usize] = i;
        }
        Ok(())
    }

    /// Whether decoding can restart at `jp` with the intermediate values left in memory.
    ///
    /// Bit `jp` reads the stage `eta(jp) + 1` LLRs and the stage `eta(jp)`
    /// partial sums. Both must be exactly what a forward pass would have left.
    pub fn can_resume_at(&self, jp: usize) -> bool {
        if jp == 0 {
            return true;
        }
        if jp > self.cursor {
            return false;
        }
        let e = eta(jp, self.n);
        let llr_ok = e + 1 == self.n || self.llr_stamp[e as usize + 1] < jp;
        llr_ok && self.psum_stamp[e as usize] == jp - 1
    }

    /// Move the cursor back to `jp` without recomputing anything.
    ///
    /// Decisions from `jp` on are cleared. Fails when the state needed at `jp`
    /// has been overwritten since it was produced.
    pub fn rewind(&mut self, jp: usize) -> Result<()> {
        if jp > self.cursor {
            return Err(Error::InvalidResume {
                resume: jp,
                reason: format!("beyond the cursor at {}", self.cursor),
            });
        }
        if !self.can_resume_at(jp) {
            return Err(Error::InvalidResume {
                resume: jp,
                reason: "required LLRs or partial sums were overwritten".into(),
            });
        }
        self.decisions[jp..].fill(0);
        self.cursor = jp;
        self.evaluated = None;
        Ok(())
    }

    /// Capture `û[0..N/2]` once the first half has been committed.
    pub fn snapshot_mid(&self, metric: f64) -> Result<Snapshot> {
        let half = self.block_len() / 2;
        if self.cursor < half {
            return Err(Error::Schedule(format!(
                "midpoint snapshot needs cursor >= {half}, cursor is {}",
                self.cursor
            )));
        }
        Ok(Snapshot {
            decisions_prefix: self.decisions[..half].to_vec(),
            metric,
            taken_at: half - 1,
        })
    }

    /// Resume at `N/2` from a snapshot: the stage `n - 1` partial sums are
    /// rebuilt as the polar transform of the prefix; everything else below is
    /// recomputed from the channel stage.
    pub fn restore_mid(&mut self, snap: &Snapshot) -> Result<()> {
        let half = self.block_len() / 2;
        if snap.decisions_prefix.len() != half {
            return Err(Error::LengthMismatch {
                expected: half,
                got: snap.decisions_prefix.len(),
            });
        }
        let top = self.n - 1;
        self.decisions[..half].copy_from_slice(&snap.decisions_prefix);
        self.decisions[half..].fill(0);
        let off = stage_offset(top);
        let sums = &mut self.psum[off..off + half];
        sums.copy_from_slice(&snap.decisions_prefix);
        polar_transform(sums);
        self.llr_stamp.fill(UNKNOWN);
        self.psum_stamp.fill(UNKNOWN);
        self.psum_stamp[top as usize] = half - 1;
        self.cursor = half;
        self.evaluated = None;
        Ok(())
    }
}
