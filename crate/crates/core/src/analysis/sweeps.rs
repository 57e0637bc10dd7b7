//! Randomized sweeps over the bounds in [`super::checks`] and the Monte
//! Carlo contraction experiment. Trials are independent and run through
//! [`Execution`]; each trial draws from its own seeded stream, so reports do
//! not depend on the execution mode.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::checks::{check_lemma1, check_lemma2, check_lemma3, check_lemma4, CHECK_MAX_DIM};
use super::SpectrumBounds;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::lbfgs::{dense_b, dense_h, LbfgsMemory};
use crate::objectives::{IsotropicQuadratic, Objective};
use crate::optimizers::{slbfgs_run, IterateChoice, SlbfgsConfig};
use crate::rng::Prng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub trial: usize,
    pub seed: u64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub check: String,
    pub instances: usize,
    pub violations: Vec<Violation>,
}

impl SweepReport {
    fn new(check: &str) -> Self {
        Self {
            check: check.to_string(),
            instances: 0,
            violations: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.instances > 0
    }
}

/// Random symmetric matrix `Q diag(e) Qᵀ` with eigenvalues drawn uniformly
/// from `[λ, Λ]`.
pub fn random_spd(prng: &mut Prng, d: usize, bounds: SpectrumBounds) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| prng.normal());
    let q = g.qr().q();
    let eig = DVector::from_fn(d, |_, _| {
        bounds.lambda + (bounds.big_lambda - bounds.lambda) * prng.uniform()
    });
    let a = &q * DMatrix::from_diagonal(&eig) * q.transpose();
    (&a + a.transpose()) * 0.5
}

/// Memory of capacity `memory` filled with pairs `y = A s`, a fresh random
/// `A` per pair. Pushes between `memory` and `2 memory` pairs so that
/// eviction is exercised.
pub fn random_memory(
    prng: &mut Prng,
    d: usize,
    memory: usize,
    bounds: SpectrumBounds,
) -> LbfgsMemory {
    let mut mem = LbfgsMemory::new(d, memory);
    let pushes = memory + prng.below(memory + 1);
    for _ in 0..pushes {
        let a = random_spd(prng, d, bounds);
        let s = DVector::from_vec(prng.normal_vec(d));
        let y = &a * &s;
        let _ = mem.push_pair(s.as_slice().to_vec(), y.as_slice().to_vec());
    }
    mem
}

/// Spectral bounds of B and H on `trials` random memories. Dimension and memory
/// size are drawn from `dims` and `memories` per trial.
pub fn lemma12_sweep(
    trials: usize,
    dims: &[usize],
    memories: &[usize],
    bounds: SpectrumBounds,
    seed: u64,
    exec: Execution,
) -> Result<(SweepReport, SweepReport)> {
    bounds.validate()?;
    if trials == 0 {
        return Err(Error::invalid("trials must be positive"));
    }
    if dims.is_empty() || dims.iter().any(|&d| d == 0 || d > CHECK_MAX_DIM) {
        return Err(Error::invalid(format!("dimensions must be in 1..={CHECK_MAX_DIM}")));
    }
    if memories.is_empty() || memories.contains(&0) {
        return Err(Error::invalid("memory sizes must be positive"));
    }
    let results = exec.map_range(trials, |trial| -> Result<(Option<String>, Option<String>)> {
        let mut prng = Prng::stream(seed, trial as u64);
        let d = dims[prng.below(dims.len())];
        let m = memories[prng.below(memories.len())];
        let mem = random_memory(&mut prng, d, m, bounds);
        let r1 = check_lemma1(&dense_b(&mem, d)?, m, bounds)?;
        let r2 = check_lemma2(&dense_h(&mem, d)?, m, bounds)?;
        let v1 = (!r1.holds()).then(|| {
            format!(
                "d={d} M={m}: trace {:e} (bound {:e}), log det {:e} (bound {:e})",
                r1.trace, r1.trace_bound, r1.log_det, r1.log_det_bound
            )
        });
        let v2 = (!r2.within_bounds).then(|| {
            format!(
                "d={d} M={m}: eig [{:e}, {:e}] not within [{:e}, {:e}]",
                r2.eig_min, r2.eig_max, r2.gamma, r2.big_gamma
            )
        });
        Ok((v1, v2))
    });
    let mut lemma1 = SweepReport::new("lemma1");
    let mut lemma2 = SweepReport::new("lemma2");
    for (trial, res) in results.into_iter().enumerate() {
        let (v1, v2) = res?;
        lemma1.instances += 1;
        lemma2.instances += 1;
        if let Some(detail) = v1 {
            lemma1.violations.push(Violation { trial, seed, detail });
        }
        if let Some(detail) = v2 {
            lemma2.violations.push(Violation { trial, seed, detail });
        }
    }
    Ok((lemma1, lemma2))
}

fn perturbed(prng: &mut Prng, center: &[f64], scale: f64) -> Vec<f64> {
    center.iter().map(|c| c + scale * prng.normal()).collect()
}

/// Gradient-difference bound at `points` random points around `w_star`.
pub fn lemma3_sweep(
    obj: &dyn Objective,
    w_star: &[f64],
    lambda: f64,
    points: usize,
    seed: u64,
    exec: Execution,
) -> Result<SweepReport> {
    let results = exec.map_range(points, |trial| {
        let mut prng = Prng::stream(seed, trial as u64);
        let x = perturbed(&mut prng, w_star, 1.0);
        check_lemma3(obj, w_star, &x, lambda)
    });
    let mut report = SweepReport::new("lemma3");
    for (trial, res) in results.into_iter().enumerate() {
        let r = res?;
        report.instances += 1;
        if !r.holds {
            report.violations.push(Violation {
                trial,
                seed,
                detail: format!("|grad|^2 = {:e} < {:e}", r.grad_norm_sq, r.rhs),
            });
        }
    }
    Ok(report)
}

/// Variance bound of the reduced gradient at `points` random `(x_t, w_k)` pairs around `w_star`.
pub fn lemma4_sweep(
    obj: &dyn Objective,
    w_star: &[f64],
    big_lambda: f64,
    points: usize,
    seed: u64,
    exec: Execution,
) -> Result<SweepReport> {
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..points)
        .map(|trial| {
            let mut prng = Prng::stream(seed, trial as u64);
            let x = perturbed(&mut prng, w_star, 1.0);
            let w = perturbed(&mut prng, w_star, 1.0);
            (x, w)
        })
        .collect();
    let mut report = SweepReport::new("lemma4");
    for (trial, (x, w)) in pairs.iter().enumerate() {
        let r = check_lemma4(obj, x, w, w_star, big_lambda, exec)?;
        report.instances += 1;
        if !r.holds {
            report.violations.push(Violation {
                trial,
                seed,
                detail: format!("E|v|^2 = {:e} > {:e}", r.lhs, r.rhs),
            });
        }
    }
    Ok(report)
}

fn component_hessian(obj: &dyn Objective, i: Option<usize>, w: &[f64]) -> DMatrix<f64> {
    let d = obj.dim();
    let mut h = DMatrix::zeros(d, d);
    let mut e = vec![0.0; d];
    let mut col = vec![0.0; d];
    for j in 0..d {
        e[j] = 1.0;
        col.iter_mut().for_each(|c| *c = 0.0);
        match i {
            Some(i) => obj.add_component_hvp(i, w, &e, &mut col),
            None => {
                for k in 0..obj.count() {
                    obj.add_component_hvp(k, w, &e, &mut col);
                }
                col.iter_mut().for_each(|c| *c /= obj.count() as f64);
            }
        }
        h.set_column(j, &DVector::from_column_slice(&col));
        e[j] = 0.0;
    }
    (&h + h.transpose()) * 0.5
}

/// Measured `(λ, Λ)` at `w`: `Λ` is the largest eigenvalue over all
/// singleton Hessians; `λ` is the regularization weight when positive and
/// otherwise the smallest eigenvalue of the full Hessian.
pub fn measure_spectrum(obj: &dyn Objective, w: &[f64], exec: Execution) -> Result<SpectrumBounds> {
    let d = obj.dim();
    if d > CHECK_MAX_DIM {
        return Err(Error::Resource(format!(
            "spectrum measurement refused for dimension {d} > {CHECK_MAX_DIM}"
        )));
    }
    crate::objectives::check_dim("w", w, d)?;
    let maxima = exec.map_range(obj.count(), |i| {
        component_hessian(obj, Some(i), w).symmetric_eigenvalues().max()
    });
    let big_lambda = maxima.into_iter().fold(f64::NEG_INFINITY, f64::max);
    let reg = obj.regularization();
    let lambda = if reg > 0.0 {
        reg
    } else {
        component_hessian(obj, None, w).symmetric_eigenvalues().min()
    };
    Ok(SpectrumBounds { lambda, big_lambda })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub seeds: usize,
    /// Mean over seeds of `f(w_k) − f*`, for `k = 0..=epochs`.
    pub mean_subopt: Vec<f64>,
    /// `mean_subopt[k+1] / mean_subopt[k]`.
    pub ratios: Vec<f64>,
}

impl ContractionReport {
    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Runs SLBFGS once per seed and averages the per-epoch suboptimality.
pub fn contraction_experiment(
    obj: &dyn Objective,
    config: &SlbfgsConfig,
    w0: &[f64],
    f_star: f64,
    seeds: &[u64],
    exec: Execution,
) -> Result<ContractionReport> {
    if seeds.is_empty() {
        return Err(Error::invalid("at least one seed is required"));
    }
    let config = SlbfgsConfig {
        record_every: None,
        ..config.clone()
    };
    let runs = exec.map(seeds.to_vec(), |seed| {
        let cfg = SlbfgsConfig {
            seed,
            ..config.clone()
        };
        slbfgs_run(obj, &cfg, w0).map(|out| {
            out.trajectory
                .epoch_samples()
                .iter()
                .map(|s| s.fx - f_star)
                .collect::<Vec<f64>>()
        })
    });
    let mut mean = vec![0.0; config.epochs + 1];
    for run in runs {
        let run = run?;
        for (m, v) in mean.iter_mut().zip(&run) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= seeds.len() as f64;
    }
    let ratios = mean.windows(2).map(|w| w[1] / w[0]).collect();
    Ok(ContractionReport {
        seeds: seeds.len(),
        mean_subopt: mean,
        ratios,
    })
}

/// A problem on which the linear-rate conditions hold with room to spare:
/// `d = 2`, `M = 1`, every subsampled Hessian equal to `I` (so `λ = Λ = 1`),
/// `η = 1e-3`, `m = 10000`, and iterates chosen at random from the inner loop.
#[derive(Debug, Clone)]
pub struct ContractionSetting {
    pub objective: IsotropicQuadratic,
    pub w_star: Vec<f64>,
    pub f_star: f64,
    pub w0: Vec<f64>,
    pub config: SlbfgsConfig,
    pub bounds: SpectrumBounds,
}

pub fn contraction_setting(seed: u64, epochs: usize) -> Result<ContractionSetting> {
    let n = 50;
    let d = 2;
    let mut prng = Prng::stream(seed, crate::rng::streams::DATA);
    let objective = IsotropicQuadratic::new(prng.normal_vec(n * d), d, 1.0)?;
    let w_star = objective.minimizer();
    let f_star = objective.value(&w_star)?;
    let w0 = perturbed(&mut prng, &w_star, 1.0);
    let config = SlbfgsConfig {
        eta: 1e-3,
        m: 10_000,
        memory: 1,
        hessian_interval: 10,
        batch: 1,
        hessian_batch: 1,
        epochs,
        seed,
        iterate_choice: IterateChoice::Random,
        record_every: None,
    };
    Ok(ContractionSetting {
        objective,
        w_star,
        f_star,
        w0,
        config,
        bounds: SpectrumBounds::new(1.0, 1.0),
    })
}
