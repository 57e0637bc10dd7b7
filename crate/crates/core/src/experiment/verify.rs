use std::fmt;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    contraction_experiment, convergence_rate, lemma12_sweep, lemma3_sweep, lemma4_sweep,
    measure_spectrum, contraction_setting, ContractionReport, SpectrumBounds, SweepReport,
    CHECK_MAX_DIM,
};
use crate::error::{Error, Result};
use crate::exec::{with_jobs, Execution};
use crate::io::{gen_synthetic_ridge, SyntheticSpec};
use crate::objectives::make_ridge;

/// Slack allowed on the measured contraction ratio above `α`.
pub const CONTRACTION_SLACK: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub dims: Vec<usize>,
    pub memories: Vec<usize>,
    pub spectrum: SpectrumBounds,
    pub trials: usize,
    pub seed: u64,
    pub contraction_seeds: usize,
    pub contraction_epochs: usize,
    pub jobs: Option<usize>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            dims: vec![2, 5, 10, 20, 50],
            memories: vec![1, 2, 5, 10],
            spectrum: SpectrumBounds::new(0.1, 10.0),
            trials: 100,
            seed: 0,
            contraction_seeds: 30,
            contraction_epochs: 3,
            jobs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub sweeps: Vec<SweepReport>,
    pub contraction: ContractionReport,
    pub alpha: f64,
    pub contraction_ok: bool,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.contraction_ok && self.sweeps.iter().all(SweepReport::passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.sweeps {
            let status = if s.passed() { "ok" } else { "FAIL" };
            writeln!(
                f,
                "{:<12} {status:<4} {} instances, {} violations",
                s.check,
                s.instances,
                s.violations.len()
            )?;
            for v in &s.violations {
                writeln!(f, "    trial {} (seed {}): {}", v.trial, v.seed, v.detail)?;
            }
        }
        let status = if self.contraction_ok { "ok" } else { "FAIL" };
        writeln!(
            f,
            "{:<12} {status:<4} {} seeds, max ratio {:.4} vs alpha {:.4} + {CONTRACTION_SLACK}",
            "theorem1",
            self.contraction.seeds,
            self.contraction.max_ratio(),
            self.alpha
        )?;
        for (k, r) in self.contraction.ratios.iter().enumerate() {
            writeln!(f, "    epoch {k} -> {}: ratio {r:.4}", k + 1)?;
        }
        write!(f, "{}", if self.passed() { "all checks passed" } else { "verification FAILED" })
    }
}

/// Spectral bounds of H and B on random memories, then the variance and gradient bounds on a synthetic ridge instance
/// and the Monte Carlo contraction at the small setting where the rate
/// conditions hold.
pub fn cmd_verify(config: &VerifyConfig) -> Result<VerifyReport> {
    if config.trials == 0 {
        return Err(Error::invalid("trials must be positive"));
    }
    if config.contraction_seeds == 0 || config.contraction_epochs == 0 {
        return Err(Error::invalid("contraction seeds and epochs must be positive"));
    }
    if let Some(d) = config.dims.iter().find(|&&d| d > CHECK_MAX_DIM) {
        return Err(Error::invalid(format!("dimension {d} exceeds {CHECK_MAX_DIM}")));
    }
    let exec = if config.jobs == Some(1) {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    with_jobs(config.jobs, || run_checks(config, exec))
}

fn run_checks(config: &VerifyConfig, exec: Execution) -> Result<VerifyReport> {
    let seed = config.seed;
    let (l1, l2) = lemma12_sweep(
        config.trials,
        &config.dims,
        &config.memories,
        config.spectrum,
        seed,
        exec,
    )?;

    let (data, reference) = gen_synthetic_ridge(&SyntheticSpec {
        n: 200,
        d: 10,
        cond: 10.0,
        noise: 0.1,
        reg: 1e-3,
        seed,
    })?;
    let ridge = make_ridge(data, 1e-3)?;
    let bounds = measure_spectrum(&ridge, &reference.w_star, exec)?;
    let l3 = lemma3_sweep(&ridge, &reference.w_star, bounds.lambda, config.trials, seed, exec)?;
    let l4 = lemma4_sweep(&ridge, &reference.w_star, bounds.big_lambda, config.trials, seed, exec)?;

    let setting = contraction_setting(seed, config.contraction_epochs)?;
    let rate = convergence_rate(2, setting.config.memory, setting.bounds, setting.config.eta, setting.config.m)?;
    let alpha = rate
        .alpha
        .ok_or_else(|| Error::AssumptionViolation("rate conditions fail in the contraction setting".into()))?;
    let seeds: Vec<u64> = (0..config.contraction_seeds as u64).map(|k| seed.wrapping_add(k)).collect();
    let contraction = contraction_experiment(
        &setting.objective,
        &setting.config,
        &setting.w0,
        setting.f_star,
        &seeds,
        exec,
    )?;
    let contraction_ok = contraction.max_ratio() <= alpha + CONTRACTION_SLACK;
    Ok(VerifyReport {
        sweeps: vec![l1, l2, l3, l4],
        contraction,
        alpha,
        contraction_ok,
    })
}
