//! Bit-index algebra of the SC schedule.
//!
//! For a code of length `N = 2^n`, bit `i` is written `i_{n-1}..i_0`. Three
//! operators drive the memory-efficient schedule:
//!
//! * [`eta`] (find-first-one): the deepest LLR stage refreshed when decoding bit `i`;
//! * [`psi`] (find-first-zero): the deepest partial-sum stage refreshed after committing bit `i`;
//! * [`phi`] (find-last-zero, reverse indexed): the order `p` of the group `Z_p` holding `j`.
//!
//! The groups `Z_0, .., Z_{n-1}` are contiguous ascending intervals whose
//! smallest elements `z_p = 2^n - 2^{n-p}` are the points where an SC pass can
//! be resumed without recomputing anything.

use crate::error::{Error, Result};

/// Largest supported code-length exponent.
pub const MAX_ORDER: u32 = 30;

/// Position of the least-significant one bit of `i`; `n - 1` for `i = 0`.
#[inline]
pub fn eta(i: usize, n: u32) -> u32 {
    if i == 0 {
        n - 1
    } else {
        i.trailing_zeros()
    }
}

/// Position of the least-significant zero bit of `i`.
///
/// Returns `None` for the all-ones index `2^n - 1`: after the last bit there
/// are no partial sums left to update.
#[inline]
pub fn psi(i: usize, n: u32) -> Option<u32> {
    let t = i.trailing_ones();
    (t < n).then_some(t)
}

/// Group order `p` of `j`: `n - 1 - (position of the most-significant zero)`,
/// or `n - 1` when `j = 2^n - 1`.
///
/// Equivalently, the number of leading ones of `j` in `n` bits, capped at `n - 1`.
#[inline]
pub fn phi(j: usize, n: u32) -> u32 {
    debug_assert!((1..=MAX_ORDER).contains(&n));
    let shifted = (!(j as u64)) << (64 - n);
    shifted.leading_zeros().min(n - 1)
}

/// Smallest member of `Z_p`: `2^n - 2^{n-p}`.
#[inline]
pub fn z_min(p: u32, n: u32) -> usize {
    debug_assert!(p < n);
    (1usize << n) - (1usize << (n - p))
}

/// Time-steps of an SC pass over bits `jp..N`: one step per refreshed stage.
pub fn resume_cost(jp: usize, n: u32) -> u64 {
    (jp..1usize << n).map(|i| u64::from(eta(i, n)) + 1).sum()
}

/// f/g evaluations of an SC pass over bits `jp..N`.
pub fn node_visit_cost(jp: usize, n: u32) -> u64 {
    (jp..1usize << n).map(|i| (2u64 << eta(i, n)) - 1).sum()
}

/// A bit index together with the code-length exponent it lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitIndex {
    value: usize,
    n: u32,
}

impl BitIndex {
    pub fn new(value: usize, n: u32) -> Result<Self> {
        if n == 0 || n > MAX_ORDER {
            return Err(Error::InvalidArgument(format!(
                "code-length exponent {n} outside [1, {MAX_ORDER}]"
            )));
        }
        if value >> n != 0 {
            return Err(Error::IndexOutOfRange {
                index: value,
                len: 1 << n,
            });
        }
        Ok(Self { value, n })
    }

    pub fn value(self) -> usize {
        self.value
    }

    pub fn order(self) -> u32 {
        self.n
    }

    pub fn eta(self) -> u32 {
        eta(self.value, self.n)
    }

    pub fn psi(self) -> Option<u32> {
        psi(self.value, self.n)
    }

    pub fn group(self) -> GroupOrder {
        GroupOrder::new(phi(self.value, self.n), self.n)
    }
}

/// The group `Z_p` as an inclusive interval `[lo, hi]`, with `lo = z_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupOrder {
    pub p: u32,
    pub n: u32,
    pub lo: usize,
    pub hi: usize,
}

impl GroupOrder {
    pub fn new(p: u32, n: u32) -> Self {
        assert!(p < n, "group order {p} out of range for n = {n}");
        let lo = z_min(p, n);
        let hi = if p + 1 < n {
            (1usize << n) - (1usize << (n - p - 1)) - 1
        } else {
            (1usize << n) - 1
        };
        Self { p, n, lo, hi }
    }

    pub fn z(&self) -> usize {
        self.lo
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    /// Always false: every group holds at least one index.
    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    pub fn contains(&self, j: usize) -> bool {
        (self.lo..=self.hi).contains(&j)
    }

    /// All groups `Z_0 .. Z_{n-1}` in ascending order.
    pub fn all(n: u32) -> impl Iterator<Item = GroupOrder> {
        (0..n).map(move |p| GroupOrder::new(p, n))
    }
}

/// Where a modification is applied (`target`) and where SC decoding resumes (`resume`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RewindPlan {
    pub target: usize,
    pub resume: usize,
    /// `z_p` of the target's group, before any refinement.
    pub group_start: usize,
    /// Retry iteration this plan belongs to, starting at 1.
    pub iteration: u32,
    /// Resume point of the previous iteration, when the plan was resolved against one.
    pub prev_resume: Option<usize>,
}

/// Resume point for rewinding an SC pass positioned at bit `i` back to bit `j < i`.
///
/// With `j ∈ Z_p` and `i ∈ Z_p'`: if `z_p < z_p'` the pass resumes at `z_p`.
/// When both share a group, the common leading `1..10` pattern is stripped and
/// the same rule is applied to the suffixes inside that sub-block, accumulating
/// the stripped prefix, until the suffixes fall into different sub-groups.
///
/// The pass is assumed to have evaluated the LLR of bit `i` (and possibly
/// committed it); bits `j..i` may have overwritten any stage below the one
/// the returned point reads.
pub fn rewind_target(i: usize, j: usize, n: u32) -> Result<RewindPlan> {
    let i_idx = BitIndex::new(i, n)?;
    let j_idx = BitIndex::new(j, n)?;
    if j >= i {
        return Err(Error::InvalidArgument(format!(
            "rewind target {j} must precede the current bit {i}"
        )));
    }
    let group_start = j_idx.group().z();
    let i_start = i_idx.group().z();
    if group_start > i_start {
        return Err(Error::Invariant(format!(
            "z_p = {group_start} of target {j} exceeds z_p' = {i_start} of current bit {i}"
        )));
    }

    let mut prefix = 0usize;
    let mut width = n;
    let (mut ki, mut kj) = (i, j);
    let resume = loop {
        assert!(width > 0, "refinement consumed every bit of {j}");
        let pj = phi(kj, width);
        let pi = phi(ki, width);
        let zj = z_min(pj, width);
        let zi = z_min(pi, width);
        if zj < zi {
            break prefix + zj;
        }
        if zj > zi {
            return Err(Error::Invariant(format!(
                "sub-group of {j} lies after that of {i} at width {width}"
            )));
        }
        // Same sub-group: strip its `1^p 0` marker (or every bit for the last group).
        let strip = pj + 1;
        if strip >= width {
            break j;
        }
        width -= strip;
        let mask = (1usize << width) - 1;
        prefix += kj & !mask;
        kj &= mask;
        ki &= mask;
    };
    debug_assert!(resume <= j && resume >= group_start);

    Ok(RewindPlan {
        target: j,
        resume,
        group_start,
        iteration: 1,
        prev_resume: None,
    })
}

/// Combine the plan of retry `t` with the plan of retry `t - 1` of the same frame.
///
/// A modification made at iteration `t - 1` invalidates every decision after
/// its own resume point, so the current pass may not resume later than that.
pub fn resolve_multi(current: RewindPlan, previous: RewindPlan) -> RewindPlan {
    let resume = if current.resume > previous.resume {
        previous.resume
    } else {
        current.resume
    };
    RewindPlan {
        resume,
        iteration: previous.iteration + 1,
        prev_resume: Some(previous.resume),
        ..current
    }
}
