//! Hessian-update bookkeeping shared by SLBFGS and SQN.
//!
//! Inner iterates are averaged over consecutive, non-overlapping blocks of
//! `L` global steps. At every global step `g > 0` with `g ≡ 0 (mod L)` the
//! block `x_{g−L} .. x_{g−1}` closes and yields `u_r`; once two averages
//! exist, `s_r = u_r − u_{r−1}` and `y_r = ∇²f_T(u_r) s_r` on an independent
//! Hessian minibatch `T`. The first pair therefore appears at step `2L`. The
//! iterate history runs across epoch boundaries.

use crate::counters::EvalCounters;
use crate::error::Result;
use crate::lbfgs::LbfgsMemory;
use crate::objectives::Objective;
use crate::rng::{sample_minibatch, streams, Prng};

pub(crate) struct CurvatureTracker {
    interval: usize,
    hessian_batch: usize,
    block_sum: Vec<f64>,
    prev_u: Option<Vec<f64>>,
    rng: Prng,
}

/// A curvature pair waiting for its Hessian-vector product.
pub(crate) struct PendingPair {
    u: Vec<f64>,
    s: Vec<f64>,
}

impl CurvatureTracker {
    pub fn new(dim: usize, interval: usize, hessian_batch: usize, seed: u64) -> Self {
        Self {
            interval,
            hessian_batch,
            block_sum: vec![0.0; dim],
            prev_u: None,
            rng: Prng::stream(seed, streams::HESSIAN),
        }
    }

    /// Called with the iterate `x_g` before step `g` is taken.
    pub fn observe(&mut self, g: u64, x: &[f64]) -> Option<PendingPair> {
        let mut pending = None;
        if g > 0 && g.is_multiple_of(self.interval as u64) {
            let l = self.interval as f64;
            let u: Vec<f64> = self.block_sum.iter().map(|v| v / l).collect();
            self.block_sum.iter_mut().for_each(|v| *v = 0.0);
            if let Some(prev) = self.prev_u.take() {
                let s = crate::linalg::sub(&u, &prev);
                pending = Some(PendingPair { u: u.clone(), s });
            }
            self.prev_u = Some(u);
        }
        for (acc, xi) in self.block_sum.iter_mut().zip(x) {
            *acc += xi;
        }
        pending
    }

    /// Forms `y = ∇²f_T(u) s` and offers the pair to `memory`.
    pub fn complete(
        &mut self,
        pending: PendingPair,
        obj: &dyn Objective,
        memory: &mut LbfgsMemory,
        counters: &mut EvalCounters,
    ) -> Result<()> {
        let batch = sample_minibatch(&mut self.rng, obj.count(), self.hessian_batch)?;
        let y = obj.hvp(&batch, &pending.u, &pending.s, counters)?;
        memory.push_pair(pending.s, y)?;
        Ok(())
    }
}
