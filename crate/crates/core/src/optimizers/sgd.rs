use serde::{Deserialize, Serialize};

use super::trajectory::Recorder;
use super::{Algorithm, RunOutput, SgdSchedule};
use crate::counters::EvalCounters;
use crate::error::{Error, Result};
use crate::objectives::{check_dim, Objective};
use crate::rng::{sample_minibatch, streams, Prng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub batch: usize,
    pub schedule: SgdSchedule,
    pub steps: usize,
    pub seed: u64,
    /// Step stride for trajectory samples; `None` samples once per `N/b` steps.
    pub record_every: Option<usize>,
}

/// Minibatch SGD, `x_{t+1} = x_t − step(t) ∇f_S(x_t)`.
///
/// The trajectory's epoch index counts blocks of `N/b` steps.
pub fn sgd_run(obj: &dyn Objective, config: &SgdConfig, w0: &[f64]) -> Result<RunOutput> {
    let n = obj.count();
    check_dim("w0", w0, obj.dim())?;
    if config.batch == 0 || config.batch > n {
        return Err(Error::invalid(format!("batch size {} must be in 1..={n}", config.batch)));
    }
    SgdSchedule::new(config.schedule.kind, config.schedule.eta0)?;
    if config.record_every == Some(0) {
        return Err(Error::invalid("record_every must be positive"));
    }
    let epoch_len = (n / config.batch).max(1) as u64;
    let stride = config.record_every.map_or(epoch_len, |r| r as u64);

    let mut counters = EvalCounters::new();
    let mut recorder = Recorder::new(obj, Algorithm::Sgd, config.seed, config.schedule.eta0);
    let mut rng = Prng::stream(config.seed, streams::GRADIENT);
    let mut x = w0.to_vec();
    recorder.record(0, &x, &counters)?;
    for t in 0..config.steps as u64 {
        let batch = sample_minibatch(&mut rng, n, config.batch)?;
        let grad = obj.grad(&batch, &x, &mut counters)?;
        let step = config.schedule.step(t);
        for (xi, gi) in x.iter_mut().zip(&grad) {
            *xi -= step * gi;
        }
        if !crate::linalg::all_finite(&x) {
            return Err(recorder.diverged(&counters));
        }
        let done = t + 1;
        if done % stride == 0 || done == config.steps as u64 {
            recorder.record((done / epoch_len) as usize, &x, &counters)?;
        }
    }
    Ok(RunOutput {
        w: x,
        trajectory: recorder.finish(),
        counters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::objectives::RidgeObjective;
    use crate::optimizers::ScheduleKind;

    #[test]
    fn geometric_iterates_on_a_scalar_quadratic() {
        // f = ½w² as a single ridge example with x = 1, y = 0.
        let obj =
            RidgeObjective::new(Dataset::dense(vec![1.0], vec![0.0], 1).unwrap(), 0.0).unwrap();
        let cfg = SgdConfig {
            batch: 1,
            schedule: SgdSchedule::constant(0.5),
            steps: 4,
            seed: 0,
            record_every: Some(1),
        };
        let out = sgd_run(&obj, &cfg, &[1.0]).unwrap();
        let fx: Vec<f64> = out.trajectory.samples.iter().map(|s| s.fx).collect();
        // w = 1, 0.5, 0.25, ... so f = ½w².
        assert_eq!(fx, vec![0.5, 0.125, 0.03125, 0.0078125, 0.001953125]);
        assert_eq!(out.w, vec![0.0625]);
    }

    #[test]
    fn one_pass_costs_n_components() {
        let mut p = Prng::new(5);
        let data = Dataset::dense(p.normal_vec(300), p.normal_vec(100), 3).unwrap();
        let obj = RidgeObjective::new(data, 0.0).unwrap();
        let cfg = SgdConfig {
            batch: 10,
            schedule: SgdSchedule::new(ScheduleKind::InvT, 0.1).unwrap(),
            steps: 10,
            seed: 1,
            record_every: None,
        };
        let out = sgd_run(&obj, &cfg, &[0.0; 3]).unwrap();
        assert_eq!(out.counters.grad_components, 100);
        assert_eq!(out.counters.passes(100), 1.0);
        assert_eq!(out.trajectory.samples.len(), 2);
        assert_eq!(out.trajectory.algo.name(), "sgd");
    }
}
