use std::time::Instant;

use super::Algorithm;
use crate::counters::EvalCounters;
use crate::error::{Error, Result};
use crate::objectives::Objective;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub epoch: usize,
    pub passes: f64,
    pub fx: f64,
    pub subopt: Option<f64>,
    pub wall_secs: f64,
}

/// Convergence trace of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub algo: Algorithm,
    pub seed: u64,
    pub eta: f64,
    pub samples: Vec<Sample>,
    /// Passes at which the run stopped on a non-finite value or iterate.
    pub diverged_at: Option<f64>,
}

impl Trajectory {
    pub fn new(algo: Algorithm, seed: u64, eta: f64) -> Self {
        Self {
            algo,
            seed,
            eta,
            samples: Vec::new(),
            diverged_at: None,
        }
    }

    /// Fills `subopt = fx − f_star` on every sample.
    pub fn set_reference(&mut self, f_star: f64) {
        for s in &mut self.samples {
            s.subopt = Some(s.fx - f_star);
        }
    }

    pub fn is_diverged(&self) -> bool {
        self.diverged_at.is_some()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    pub fn final_value(&self) -> Option<f64> {
        self.last().map(|s| s.fx)
    }

    /// Final suboptimality; infinite for a diverged run.
    pub fn final_subopt(&self) -> Option<f64> {
        if self.is_diverged() {
            return Some(f64::INFINITY);
        }
        self.last().and_then(|s| s.subopt)
    }

    /// Samples taken at epoch boundaries (one per epoch index, last wins).
    pub fn epoch_samples(&self) -> Vec<Sample> {
        let mut out: Vec<Sample> = Vec::new();
        for s in &self.samples {
            match out.last_mut() {
                Some(prev) if prev.epoch == s.epoch => *prev = *s,
                _ => out.push(*s),
            }
        }
        out
    }
}

/// Samples the objective along a run and turns non-finite values into
/// [`Error::Diverged`].
pub(crate) struct Recorder<'a> {
    obj: &'a dyn Objective,
    n: usize,
    start: Instant,
    trajectory: Trajectory,
}

impl<'a> Recorder<'a> {
    pub fn new(obj: &'a dyn Objective, algo: Algorithm, seed: u64, eta: f64) -> Self {
        Self {
            obj,
            n: obj.count(),
            start: Instant::now(),
            trajectory: Trajectory::new(algo, seed, eta),
        }
    }

    pub fn record(&mut self, epoch: usize, w: &[f64], counters: &EvalCounters) -> Result<()> {
        let fx = if crate::linalg::all_finite(w) {
            self.obj.value(w)?
        } else {
            f64::NAN
        };
        if !fx.is_finite() {
            return Err(self.diverged(counters));
        }
        self.trajectory.samples.push(Sample {
            epoch,
            passes: counters.passes(self.n),
            fx,
            subopt: None,
            wall_secs: self.start.elapsed().as_secs_f64(),
        });
        Ok(())
    }

    /// Error to return when an iterate or direction went non-finite.
    pub fn diverged(&mut self, counters: &EvalCounters) -> Error {
        let fresh = Trajectory::new(self.trajectory.algo, self.trajectory.seed, self.trajectory.eta);
        let mut trajectory = std::mem::replace(&mut self.trajectory, fresh);
        let passes = counters.passes(self.n);
        trajectory.diverged_at = Some(passes);
        Error::Diverged {
            passes,
            trajectory: Box::new(trajectory),
        }
    }

    pub fn finish(self) -> Trajectory {
        self.trajectory
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(epoch: usize, passes: f64) -> Sample {
        Sample {
            epoch,
            passes,
            fx: passes,
            subopt: None,
            wall_secs: 0.0,
        }
    }

    #[test]
    fn epoch_samples_keep_last_per_epoch() {
        let mut t = Trajectory::new(Algorithm::Sgd, 0, 0.1);
        t.samples = vec![sample(0, 0.0), sample(0, 0.5), sample(1, 1.0), sample(2, 2.0)];
        let e = t.epoch_samples();
        assert_eq!(e.iter().map(|s| s.passes).collect::<Vec<_>>(), vec![0.5, 1.0, 2.0]);
        t.set_reference(0.25);
        assert_eq!(t.final_subopt(), Some(1.75));
        t.diverged_at = Some(3.0);
        assert_eq!(t.final_subopt(), Some(f64::INFINITY));
    }
}
