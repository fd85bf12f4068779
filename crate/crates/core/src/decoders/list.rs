use super::{plan_after_pass, Attempt, DecodeOutcome, Rewind, ShiftStrategy, SmallestMargin};
use crate::code::CodeSpec;
use crate::error::{Error, Result};
use crate::index::eta;
use crate::kernel::{PathPool, Snapshot};

#[inline]
fn penalty(llr: f64, bit: u8) -> f64 {
    if (llr < 0.0) != (bit == 1) {
        llr.abs()
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    metric: f64,
    pos: usize,
    bit: u8,
}

/// Where a list pass starts.
enum Start<'s> {
    Fresh(&'s [f64]),
    Mid(&'s [Snapshot]),
}

/// Outcome of one list pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ListPass {
    pub decisions: Vec<u8>,
    pub crc_ok: bool,
    pub time_steps: u64,
    pub node_visits: u64,
    /// Surviving paths at the end, in list order: `(decisions, metric)`.
    pub survivors: Vec<(Vec<u8>, f64)>,
}

/// List-decoding engine shared by the SCL and shifted-pruning decoders.
#[derive(Debug, Clone)]
struct ListEngine {
    list: usize,
    pool: PathPool,
    order: Vec<usize>,
    metrics: Vec<f64>,
    llrs: Vec<f64>,
    cands: Vec<Candidate>,
}

impl ListEngine {
    fn new(spec: &CodeSpec, list: usize) -> Result<Self> {
        if list == 0 || !list.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "list size must be a power of two, got {list}"
            )));
        }
        Ok(Self {
            list,
            pool: PathPool::new(spec.order(), list)?,
            order: Vec::with_capacity(list),
            metrics: Vec::with_capacity(list),
            llrs: Vec::with_capacity(list),
            cands: Vec::with_capacity(2 * list),
        })
    }

    /// Run one pass; `shift` selects ranks `L+1..2L` at that bit.
    ///
    /// `snapshot` receives the paths at the midpoint, `risks` the pruning
    /// margin of every bit where the list was cut.
    fn run(
        &mut self,
        spec: &CodeSpec,
        start: Start<'_>,
        shift: Option<usize>,
        mut snapshot: Option<&mut Vec<Snapshot>>,
        mut risks: Option<&mut Vec<(usize, f64)>>,
    ) -> Result<ListPass> {
        let len = spec.block_len();
        let n = spec.order();
        let half = len / 2;
        self.order.clear();
        self.metrics.clear();
        let first = match start {
            Start::Fresh(ch) => {
                self.order.push(self.pool.load(ch)?);
                self.metrics.push(0.0);
                0
            }
            Start::Mid(snaps) => {
                let ids = self
                    .pool
                    .restore_mid(snaps.iter().map(|s| s.decisions_prefix.as_slice()))?;
                self.order.extend(ids);
                self.metrics.extend(snaps.iter().map(|s| s.metric));
                half
            }
        };
        let visits_before = self.pool.counters().node_visits;
        let mut time_steps = 0u64;
        for i in first..len {
            time_steps += u64::from(eta(i, n)) + 1;
            self.llrs.clear();
            for &p in &self.order {
                let l = self.pool.bit_llr(p, i)?;
                self.llrs.push(l);
            }
            if !spec.is_info(i) {
                for (k, &p) in self.order.iter().enumerate() {
                    self.metrics[k] += penalty(self.llrs[k], 0);
                    self.pool.commit(p, i, 0)?;
                }
            } else {
                self.extend(i, shift == Some(i), risks.as_deref_mut())?;
            }
            if i + 1 == half {
                if let Some(out) = snapshot.as_deref_mut() {
                    out.clear();
                    for (k, &p) in self.order.iter().enumerate() {
                        out.push(Snapshot {
                            decisions_prefix: self.pool.decisions(p)[..half].to_vec(),
                            metric: self.metrics[k],
                            taken_at: i,
                        });
                    }
                }
            }
        }
        let node_visits = self.pool.counters().node_visits - visits_before;

        // Lowest metric among CRC-passing paths, else lowest metric overall.
        let mut best: Option<(usize, bool)> = None;
        for k in 0..self.order.len() {
            let ok = spec.crc_ok(self.pool.decisions(self.order[k]));
            best = match best {
                None => Some((k, ok)),
                Some((b, bok)) => {
                    let better = (ok && !bok) || (ok == bok && self.metrics[k] < self.metrics[b]);
                    Some(if better { (k, ok) } else { (b, bok) })
                }
            };
        }
        let (b, crc_ok) = best.expect("list is never empty");
        Ok(ListPass {
            decisions: self.pool.decisions(self.order[b]).to_vec(),
            crc_ok,
            time_steps,
            node_visits,
            survivors: self
                .order
                .iter()
                .zip(&self.metrics)
                .map(|(&p, &m)| (self.pool.decisions(p).to_vec(), m))
                .collect(),
        })
    }

    /// Fork every path on information bit `i` and prune back to `L`.
    fn extend(&mut self, i: usize, shifted: bool, risks: Option<&mut Vec<(usize, f64)>>) -> Result<()> {
        let l = self.list;
        self.cands.clear();
        for (k, &llr) in self.llrs.iter().enumerate() {
            for bit in [0u8, 1] {
                self.cands.push(Candidate {
                    metric: self.metrics[k] + penalty(llr, bit),
                    pos: k,
                    bit,
                });
            }
        }
        let total = self.cands.len();
        if total > l {
            self.cands.sort_by(|a, b| {
                a.metric
                    .total_cmp(&b.metric)
                    .then(a.pos.cmp(&b.pos))
                    .then(a.bit.cmp(&b.bit))
            });
            if let Some(r) = risks {
                r.push((i, self.cands[l].metric - self.cands[l - 1].metric));
            }
            if shifted {
                self.cands.drain(..l);
            }
            self.cands.truncate(l);
            self.cands.sort_by_key(|c| (c.pos, c.bit));
        }

        let old = std::mem::take(&mut self.order);
        let mut children = vec![0u8; old.len()];
        for c in &self.cands {
            children[c.pos] += 1;
        }
        for (k, &p) in old.iter().enumerate() {
            if children[k] == 0 {
                self.pool.kill(p)?;
            }
        }
        let mut new_order = Vec::with_capacity(self.cands.len());
        let mut new_metrics = Vec::with_capacity(self.cands.len());
        let mut prev_pos = usize::MAX;
        for c in &self.cands {
            let parent = old[c.pos];
            let id = if c.pos == prev_pos {
                self.pool.fork(parent)?
            } else {
                parent
            };
            prev_pos = c.pos;
            new_order.push(id);
            new_metrics.push(c.metric);
        }
        // Forks share buffers with their parent, so commit only after all forks exist.
        for (c, &id) in self.cands.iter().zip(&new_order) {
            self.pool.commit(id, i, c.bit)?;
        }
        self.order = new_order;
        self.metrics = new_metrics;
        Ok(())
    }
}

fn attempt_of(pass: &ListPass, target: Option<usize>, resume: usize) -> Attempt {
    Attempt {
        target,
        resume,
        time_steps: pass.time_steps,
        node_visits: pass.node_visits,
        crc_ok: pass.crc_ok,
    }
}

/// CRC-aided successive-cancellation list decoder.
#[derive(Debug, Clone)]
pub struct SclDecoder<'a> {
    spec: &'a CodeSpec,
    engine: ListEngine,
}

impl<'a> SclDecoder<'a> {
    pub fn new(spec: &'a CodeSpec, list: usize) -> Result<Self> {
        Ok(Self {
            spec,
            engine: ListEngine::new(spec, list)?,
        })
    }

    pub fn decode(&mut self, channel_llrs: &[f64]) -> Result<DecodeOutcome> {
        let pass = self.run(channel_llrs)?;
        let log = vec![attempt_of(&pass, None, 0)];
        Ok(DecodeOutcome::new(self.spec, pass.decisions, pass.crc_ok, log))
    }

    /// One pass with full access to the surviving list.
    pub fn run(&mut self, channel_llrs: &[f64]) -> Result<ListPass> {
        self.engine
            .run(self.spec, Start::Fresh(channel_llrs), None, None, None)
    }
}

/// SCL with shifted pruning: after a CRC failure, retry with the pruning
/// window shifted at one high-risk bit.
///
/// With partial rewind a retry whose bit lies in the second half restarts at
/// `N/2` from the paths captured at the midpoint of the first pass.
#[derive(Debug, Clone)]
pub struct SpSclDecoder<'a, S = SmallestMargin> {
    spec: &'a CodeSpec,
    t_max: usize,
    rewind: Rewind,
    strategy: S,
    engine: ListEngine,
    snapshot: Vec<Snapshot>,
    risks: Vec<(usize, f64)>,
}

impl<'a> SpSclDecoder<'a, SmallestMargin> {
    pub fn new(spec: &'a CodeSpec, list: usize, t_max: usize, rewind: Rewind) -> Result<Self> {
        Self::with_strategy(spec, list, t_max, rewind, SmallestMargin)
    }
}

impl<'a, S: ShiftStrategy> SpSclDecoder<'a, S> {
    pub fn with_strategy(
        spec: &'a CodeSpec,
        list: usize,
        t_max: usize,
        rewind: Rewind,
        strategy: S,
    ) -> Result<Self> {
        Ok(Self {
            spec,
            t_max,
            rewind,
            strategy,
            engine: ListEngine::new(spec, list)?,
            snapshot: Vec::new(),
            risks: Vec::new(),
        })
    }

    pub fn decode(&mut self, channel_llrs: &[f64]) -> Result<DecodeOutcome> {
        let spec = self.spec;
        let half = spec.block_len() / 2;
        self.risks.clear();
        let first = self.engine.run(
            spec,
            Start::Fresh(channel_llrs),
            None,
            Some(&mut self.snapshot),
            Some(&mut self.risks),
        )?;
        let mut ok = first.crc_ok;
        let mut log = vec![attempt_of(&first, None, 0)];
        let mut decisions = first.decisions;
        if ok {
            return Ok(DecodeOutcome::new(spec, decisions, ok, log));
        }
        let first_decisions = decisions.clone();
        for j in self.strategy.positions(spec, &self.risks, self.t_max) {
            let resume = match self.rewind {
                Rewind::Partial if plan_after_pass(j, spec.order())?.resume >= half => half,
                _ => 0,
            };
            let pass = if resume == half {
                self.engine
                    .run(spec, Start::Mid(&self.snapshot), Some(j), None, None)?
            } else {
                self.engine
                    .run(spec, Start::Fresh(channel_llrs), Some(j), None, None)?
            };
            ok = pass.crc_ok;
            log.push(attempt_of(&pass, Some(j), resume));
            decisions = pass.decisions;
            if ok {
                break;
            }
        }
        if !ok {
            decisions = first_decisions;
        }
        Ok(DecodeOutcome::new(spec, decisions, ok, log))
    }
}
