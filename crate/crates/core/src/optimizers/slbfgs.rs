use super::curvature::CurvatureTracker;
use super::trajectory::Recorder;
use super::{vr_gradient, Algorithm, IterateChoice, RunOutput, SlbfgsConfig};
use crate::counters::EvalCounters;
use crate::error::Result;
use crate::lbfgs::LbfgsMemory;
use crate::objectives::{check_dim, Objective};
use crate::rng::{sample_minibatch, streams, Prng};

/// Variance-reduced stochastic L-BFGS.
///
/// Each epoch takes a full gradient `μ_k` at the snapshot `w_k`, then runs
/// `m` inner steps `x_{t+1} = x_t − η H v_t` with the variance-reduced
/// gradient `v_t`. The inverse-Hessian approximation `H` is refreshed every
/// `L` inner steps from Hessian-vector products (see the curvature tracker)
/// and is used immediately. Memory and iterate history persist across
/// epochs.
pub fn slbfgs_run(obj: &dyn Objective, config: &SlbfgsConfig, w0: &[f64]) -> Result<RunOutput> {
    run_variance_reduced(obj, config, w0, Algorithm::Slbfgs)
}

/// SVRG: the same epoch structure with `H = I` and no Hessian updates.
pub fn svrg_run(obj: &dyn Objective, config: &SlbfgsConfig, w0: &[f64]) -> Result<RunOutput> {
    run_variance_reduced(obj, config, w0, Algorithm::Svrg)
}

fn run_variance_reduced(
    obj: &dyn Objective,
    config: &SlbfgsConfig,
    w0: &[f64],
    algo: Algorithm,
) -> Result<RunOutput> {
    let n = obj.count();
    let d = obj.dim();
    let curvature = algo == Algorithm::Slbfgs && config.memory > 0;
    config.validate(n, curvature)?;
    check_dim("w0", w0, d)?;

    let mut counters = EvalCounters::new();
    let mut recorder = Recorder::new(obj, algo, config.seed, config.eta);
    let mut grad_rng = Prng::stream(config.seed, streams::GRADIENT);
    let mut iterate_rng = Prng::stream(config.seed, streams::ITERATE);
    let mut memory = LbfgsMemory::new(d, if curvature { config.memory } else { 0 });
    let mut tracker = curvature.then(|| {
        CurvatureTracker::new(d, config.hessian_interval, config.hessian_batch, config.seed)
    });
    let stride = config.record_every.unwrap_or(config.m);

    let mut w = w0.to_vec();
    recorder.record(0, &w, &counters)?;
    let mut g: u64 = 0;
    for k in 0..config.epochs {
        let mu = obj.full_grad(&w, &mut counters)?;
        if !crate::linalg::all_finite(&mu) {
            return Err(recorder.diverged(&counters));
        }
        let chosen = match config.iterate_choice {
            IterateChoice::Last => None,
            IterateChoice::Random => Some(iterate_rng.below(config.m)),
        };
        let mut picked: Option<Vec<f64>> = None;
        let mut x = w.clone();
        for t in 0..config.m {
            if chosen == Some(t) {
                picked = Some(x.clone());
            }
            let pending = tracker.as_mut().and_then(|tr| tr.observe(g, &x));
            let batch = sample_minibatch(&mut grad_rng, n, config.batch)?;
            let v = vr_gradient(obj, &batch, &x, &w, &mu, &mut counters)?;
            let dir = memory.two_loop_apply(&v)?;
            for (xi, di) in x.iter_mut().zip(&dir) {
                *xi -= config.eta * di;
            }
            if !crate::linalg::all_finite(&x) {
                return Err(recorder.diverged(&counters));
            }
            if let (Some(tr), Some(p)) = (tracker.as_mut(), pending) {
                tr.complete(p, obj, &mut memory, &mut counters)?;
            }
            g += 1;
            if (t + 1) % stride == 0 && t + 1 < config.m {
                recorder.record(k, &x, &counters)?;
            }
        }
        w = picked.unwrap_or(x);
        recorder.record(k + 1, &w, &counters)?;
    }

    Ok(RunOutput {
        w,
        trajectory: recorder.finish(),
        counters,
    })
}
