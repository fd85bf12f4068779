use super::sc::sc_pass;
use super::{plan_after_pass, Attempt, DecodeOutcome, FlipStrategy, LeastReliable, Rewind};
use crate::code::CodeSpec;
use crate::error::Result;
use crate::index::{resolve_multi, RewindPlan};
use crate::kernel::ScMemory;

/// SC-flip: after a CRC failure, retry with one information bit inverted.
///
/// Each retry flips exactly one bit relative to the initial pass. With
/// partial rewind the retry resumes where the state for the flipped bit
/// (and for undoing the previous flip) is still in memory.
#[derive(Debug, Clone)]
pub struct ScFlipDecoder<'a, S = LeastReliable> {
    spec: &'a CodeSpec,
    t_max: usize,
    rewind: Rewind,
    strategy: S,
    mem: ScMemory,
    llrs: Vec<f64>,
}

impl<'a> ScFlipDecoder<'a, LeastReliable> {
    pub fn new(spec: &'a CodeSpec, t_max: usize, rewind: Rewind) -> Self {
        Self::with_strategy(spec, t_max, rewind, LeastReliable)
    }
}

impl<'a, S: FlipStrategy> ScFlipDecoder<'a, S> {
    pub fn with_strategy(spec: &'a CodeSpec, t_max: usize, rewind: Rewind, strategy: S) -> Self {
        Self {
            spec,
            t_max,
            rewind,
            strategy,
            mem: ScMemory::new(spec.order()),
            llrs: vec![0.0; spec.block_len()],
        }
    }

    pub fn decode(&mut self, channel_llrs: &[f64]) -> Result<DecodeOutcome> {
        let spec = self.spec;
        self.mem.load(channel_llrs)?;
        sc_pass(spec, &mut self.mem, None, Some(&mut self.llrs))?;
        let mut ok = spec.crc_ok(self.mem.decisions());
        let c = self.mem.counters();
        let mut log = vec![Attempt {
            target: None,
            resume: 0,
            time_steps: c.time_steps,
            node_visits: c.node_visits,
            crc_ok: ok,
        }];
        if !ok {
            let first = self.mem.decisions().to_vec();
            let mut prev: Option<RewindPlan> = None;
            for j in self.strategy.candidates(spec, &self.llrs, self.t_max) {
                let resume = match self.rewind {
                    Rewind::Partial => {
                        let mut plan = plan_after_pass(j, spec.order())?;
                        if let Some(p) = prev {
                            plan = resolve_multi(plan, p);
                        }
                        prev = Some(plan);
                        plan.resume
                    }
                    Rewind::Restart => 0,
                };
                self.mem.rewind(resume)?;
                debug_assert_eq!(&self.mem.decisions()[..resume], &first[..resume]);
                self.mem.reset_counters();
                sc_pass(spec, &mut self.mem, Some(j), None)?;
                ok = spec.crc_ok(self.mem.decisions());
                let c = self.mem.counters();
                log.push(Attempt {
                    target: Some(j),
                    resume,
                    time_steps: c.time_steps,
                    node_visits: c.node_visits,
                    crc_ok: ok,
                });
                if ok {
                    break;
                }
            }
            if !ok {
                // No retry passed: report the initial estimate.
                return Ok(DecodeOutcome::new(spec, first, false, log));
            }
        }
        Ok(DecodeOutcome::new(spec, self.mem.decisions().to_vec(), ok, log))
    }
}
