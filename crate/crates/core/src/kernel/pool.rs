//! Multi-path SC memory for list decoding.
//!
//! Each stage owns `L` buffers shared between paths by reference count.
//! Forking a path only bumps counts; a path takes a private buffer the
//! first time it writes a shared stage. Stage writes always overwrite the
//! whole buffer, so no copy is needed on divergence.

use super::{fan_out, update_stage, Counters};
use crate::code::{bit_reverse, polar_transform};
use crate::error::{Error, Result};
use crate::index::{eta, psi};

#[derive(Debug, Clone)]
struct StageBuffers<T> {
    data: Vec<Vec<T>>,
    refs: Vec<u32>,
    free: Vec<usize>,
}

impl<T: Clone + Default> StageBuffers<T> {
    fn new(count: usize, width: usize) -> Self {
        Self {
            data: vec![vec![T::default(); width]; count],
            refs: vec![0; count],
            free: (0..count).rev().collect(),
        }
    }

    fn reset(&mut self) {
        self.refs.fill(0);
        self.free.clear();
        self.free.extend((0..self.data.len()).rev());
    }

    fn acquire(&mut self) -> usize {
        let b = self.free.pop().expect("stage buffer pool exhausted");
        self.refs[b] = 1;
        b
    }

    fn release(&mut self, b: usize) {
        self.refs[b] -= 1;
        if self.refs[b] == 0 {
            self.free.push(b);
        }
    }

    /// Buffer `b` if exclusively held, otherwise a fresh one replacing it.
    fn make_private(&mut self, b: usize) -> usize {
        if self.refs[b] == 1 {
            b
        } else {
            self.release(b);
            self.acquire()
        }
    }
}

#[derive(Debug, Clone)]
struct PathSlot {
    llr: Vec<usize>,
    psum: Vec<usize>,
    decisions: Vec<u8>,
    active: bool,
}

/// Up to `capacity` SC paths over one shared channel stage.
#[derive(Debug, Clone)]
pub struct PathPool {
    n: u32,
    capacity: usize,
    channel: Vec<f64>,
    llr: Vec<StageBuffers<f64>>,
    psum: Vec<StageBuffers<u8>>,
    paths: Vec<PathSlot>,
    free_paths: Vec<usize>,
    counters: Counters,
}

impl PathPool {
    pub fn new(n: u32, capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidArgument("list size must be at least 1".into()));
        }
        let len = 1usize << n;
        Ok(Self {
            n,
            capacity,
            channel: vec![0.0; len],
            llr: (0..n).map(|s| StageBuffers::new(capacity, 1 << s)).collect(),
            psum: (0..n).map(|s| StageBuffers::new(capacity, 1 << s)).collect(),
            paths: (0..capacity)
                .map(|_| PathSlot {
                    llr: vec![0; n as usize],
                    psum: vec![0; n as usize],
                    decisions: vec![0; len],
                    active: false,
                })
                .collect(),
            free_paths: Vec::with_capacity(capacity),
            counters: Counters::default(),
        })
    }

    /// Load channel LLRs (channel order) and start over with a single path, returned.
    pub fn load(&mut self, channel_llrs: &[f64]) -> Result<usize> {
        let len = self.block_len();
        if channel_llrs.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                got: channel_llrs.len(),
            });
        }
        for (m, slot) in self.channel.iter_mut().enumerate() {
            *slot = channel_llrs[bit_reverse(m, self.n)];
        }
        self.counters = Counters::default();
        self.clear_paths();
        Ok(self.spawn())
    }

    fn clear_paths(&mut self) {
        for st in self.llr.iter_mut() {
            st.reset();
        }
        for st in self.psum.iter_mut() {
            st.reset();
        }
        for p in self.paths.iter_mut() {
            p.active = false;
        }
        self.free_paths.clear();
        self.free_paths.extend((0..self.capacity).rev());
    }

    fn spawn(&mut self) -> usize {
        let id = self.free_paths.pop().expect("path pool exhausted");
        let slot = &mut self.paths[id];
        slot.active = true;
        slot.decisions.fill(0);
        for s in 0..self.n as usize {
            slot.llr[s] = self.llr[s].acquire();
            slot.psum[s] = self.psum[s].acquire();
        }
        id
    }

    pub fn block_len(&self) -> usize {
        1 << self.n
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn active_paths(&self) -> usize {
        self.capacity - self.free_paths.len()
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn decisions(&self, path: usize) -> &[u8] {
        &self.paths[path].decisions
    }

    fn check_active(&self, path: usize) -> Result<()> {
        if self.paths.get(path).is_some_and(|p| p.active) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("path {path} is not active")))
        }
    }

    /// New path sharing every buffer and decision of `path`.
    pub fn fork(&mut self, path: usize) -> Result<usize> {
        self.check_active(path)?;
        let Some(id) = self.free_paths.pop() else {
            return Err(Error::InvalidArgument("path pool exhausted".into()));
        };
        for s in 0..self.n as usize {
            let (lb, pb) = (self.paths[path].llr[s], self.paths[path].psum[s]);
            self.llr[s].refs[lb] += 1;
            self.psum[s].refs[pb] += 1;
            self.paths[id].llr[s] = lb;
            self.paths[id].psum[s] = pb;
        }
        let (src, dst) = if path < id {
            let (a, b) = self.paths.split_at_mut(id);
            (&a[path], &mut b[0])
        } else {
            let (a, b) = self.paths.split_at_mut(path);
            (&b[0], &mut a[id])
        };
        dst.decisions.copy_from_slice(&src.decisions);
        dst.active = true;
        Ok(id)
    }

    pub fn kill(&mut self, path: usize) -> Result<()> {
        self.check_active(path)?;
        for s in 0..self.n as usize {
            self.llr[s].release(self.paths[path].llr[s]);
            self.psum[s].release(self.paths[path].psum[s]);
        }
        self.paths[path].active = false;
        self.free_paths.push(path);
        Ok(())
    }

    /// Decision LLR of bit `i` on `path`, refreshing its stages `eta(i)` down to 0.
    ///
    /// The caller keeps all paths in lockstep; every path evaluates bit `i`
    /// before any of them commits it.
    pub fn bit_llr(&mut self, path: usize, i: usize) -> Result<f64> {
        self.check_active(path)?;
        if i >= self.block_len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.block_len(),
            });
        }
        let n = self.n;
        let top = eta(i, n);
        for s in (0..=top).rev() {
            let su = s as usize;
            let child_buf = self.llr[su].make_private(self.paths[path].llr[su]);
            self.paths[path].llr[su] = child_buf;
            let betas = if (i >> s) & 1 == 1 {
                Some(self.psum[su].data[self.paths[path].psum[su]].as_slice())
            } else {
                None
            };
            if s + 1 == n {
                update_stage(&self.channel, &mut self.llr[su].data[child_buf], betas);
            } else {
                let parent_buf = self.paths[path].llr[su + 1];
                let (lower, upper) = self.llr.split_at_mut(su + 1);
                update_stage(&upper[0].data[parent_buf], &mut lower[su].data[child_buf], betas);
            }
        }
        self.counters.node_visits += (2u64 << top) - 1;
        Ok(self.llr[0].data[self.paths[path].llr[0]][0])
    }

    pub fn commit(&mut self, path: usize, i: usize, bit: u8) -> Result<()> {
        self.check_active(path)?;
        let bit = bit & 1;
        self.paths[path].decisions[i] = bit;
        if let Some(t) = psi(i, self.n) {
            let tu = t as usize;
            let target_buf = self.psum[tu].make_private(self.paths[path].psum[tu]);
            self.paths[path].psum[tu] = target_buf;
            let (lower, upper) = self.psum.split_at_mut(tu);
            let slot = &self.paths[path];
            fan_out(&mut upper[0].data[target_buf], bit, t, |s| {
                lower[s as usize].data[slot.psum[s as usize]].as_slice()
            });
        }
        Ok(())
    }

    /// Discard every path and recreate one path per prefix, positioned at bit `N/2`.
    ///
    /// Returns the new path ids in prefix order.
    pub fn restore_mid<'a>(&mut self, prefixes: impl IntoIterator<Item = &'a [u8]>) -> Result<Vec<usize>> {
        let half = self.block_len() / 2;
        let top = (self.n - 1) as usize;
        self.clear_paths();
        let mut ids = Vec::new();
        for prefix in prefixes {
            if prefix.len() != half {
                return Err(Error::LengthMismatch {
                    expected: half,
                    got: prefix.len(),
                });
            }
            if ids.len() == self.capacity {
                return Err(Error::InvalidArgument("more prefixes than list slots".into()));
            }
            let id = self.spawn();
            self.paths[id].decisions[..half].copy_from_slice(prefix);
            let sums = &mut self.psum[top].data[self.paths[id].psum[top]];
            sums.copy_from_slice(prefix);
            polar_transform(sums);
            ids.push(id);
        }
        Ok(ids)
    }
}
