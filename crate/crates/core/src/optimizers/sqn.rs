use super::curvature::CurvatureTracker;
use super::trajectory::Recorder;
use super::{Algorithm, RunOutput, SgdSchedule, SlbfgsConfig};
use crate::counters::EvalCounters;
use crate::error::Result;
use crate::lbfgs::LbfgsMemory;
use crate::objectives::{check_dim, Objective};
use crate::rng::{sample_minibatch, streams, Prng};

/// Stochastic quasi-Newton: the SLBFGS curvature machinery driven by the raw
/// minibatch gradient `∇f_S(x_t)` (no full gradients, no variance reduction)
/// and a step-size schedule.
///
/// `config.m` is the number of steps per epoch and `config.eta` is ignored
/// in favour of `schedule`; `iterate_choice` does not apply.
pub fn sqn_run(
    obj: &dyn Objective,
    config: &SlbfgsConfig,
    schedule: &SgdSchedule,
    w0: &[f64],
) -> Result<RunOutput> {
    let n = obj.count();
    let d = obj.dim();
    let curvature = config.memory > 0;
    let checked = SlbfgsConfig {
        eta: schedule.eta0,
        ..config.clone()
    };
    checked.validate(n, curvature)?;
    check_dim("w0", w0, d)?;

    let mut counters = EvalCounters::new();
    let mut recorder = Recorder::new(obj, Algorithm::Sqn, config.seed, schedule.eta0);
    let mut grad_rng = Prng::stream(config.seed, streams::GRADIENT);
    let mut memory = LbfgsMemory::new(d, config.memory);
    let mut tracker = curvature.then(|| {
        CurvatureTracker::new(d, config.hessian_interval, config.hessian_batch, config.seed)
    });
    let stride = config.record_every.unwrap_or(config.m);
    let total = (config.epochs * config.m) as u64;

    let mut x = w0.to_vec();
    recorder.record(0, &x, &counters)?;
    for g in 0..total {
        let pending = tracker.as_mut().and_then(|tr| tr.observe(g, &x));
        let batch = sample_minibatch(&mut grad_rng, n, config.batch)?;
        let grad = obj.grad(&batch, &x, &mut counters)?;
        let dir = memory.two_loop_apply(&grad)?;
        let step = schedule.step(g);
        for (xi, di) in x.iter_mut().zip(&dir) {
            *xi -= step * di;
        }
        if !crate::linalg::all_finite(&x) {
            return Err(recorder.diverged(&counters));
        }
        if let (Some(tr), Some(p)) = (tracker.as_mut(), pending) {
            tr.complete(p, obj, &mut memory, &mut counters)?;
        }
        let done = g + 1;
        let epoch_end = done % config.m as u64 == 0;
        if epoch_end || done % stride as u64 == 0 {
            recorder.record((done / config.m as u64) as usize, &x, &counters)?;
        }
    }

    Ok(RunOutput {
        w: x,
        trajectory: recorder.finish(),
        counters,
    })
}
