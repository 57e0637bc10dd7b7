use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::problem::Problem;
use crate::error::{Error, Result};
use crate::exec::{with_jobs, Execution};
use crate::io::{format_float, write_trajectory_file, ReferenceSolution};
use crate::optimizers::{
    sgd_run, slbfgs_run, sqn_run, svrg_run, Algorithm, SgdConfig, SgdSchedule, SlbfgsConfig,
    Trajectory,
};

#[derive(Debug, Clone)]
pub struct RunReport {
    pub trajectory: Trajectory,
    pub reference: Option<ReferenceSolution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummaryRow {
    pub algo: Algorithm,
    pub eta: f64,
    /// Median over seeds of the final suboptimality (final objective value
    /// when there is no reference); diverged cells count as `+inf`.
    pub median_final_subopt: f64,
    pub diverged_cells: usize,
    pub cells: usize,
}

#[derive(Debug, Clone)]
pub struct GridReport {
    pub trajectories: Vec<Trajectory>,
    pub summary: Vec<GridSummaryRow>,
    pub best_eta: Option<f64>,
}

/// Data passes per epoch of `algo` under `s` on `n` examples, counting
/// steady-state epochs (after the curvature warm-up).
pub fn passes_per_epoch(algo: Algorithm, n: usize, s: &SlbfgsConfig) -> f64 {
    let inner = (s.m * s.batch) as f64;
    let hvp = if s.memory > 0 {
        (s.hessian_batch * (s.m / s.hessian_interval.max(1))) as f64
    } else {
        0.0
    };
    let work = match algo {
        Algorithm::Slbfgs => n as f64 + 2.0 * inner + hvp,
        Algorithm::Svrg => n as f64 + 2.0 * inner,
        Algorithm::Sqn => inner + hvp,
        Algorithm::Sgd => inner,
    };
    work / n as f64
}

fn solver_settings(config: &ExperimentConfig, n: usize, eta: f64, seed: u64) -> SlbfgsConfig {
    let batch = config.batch.unwrap_or(20.min(n).max(1));
    let mut s = SlbfgsConfig {
        eta,
        m: config.inner.unwrap_or((n / batch).max(1)),
        memory: config.memory,
        hessian_interval: config.hessian_interval,
        batch,
        hessian_batch: config.hessian_batch.unwrap_or((10 * batch).min(n)),
        epochs: config.epochs,
        seed,
        iterate_choice: config.iterate_choice,
        record_every: config.record_every,
    };
    if let Some(budget) = config.max_passes {
        let per = passes_per_epoch(config.algorithm, n, &s);
        s.epochs = ((budget / per + 1e-9).floor() as usize).max(1);
    }
    s
}

/// One `(eta, seed)` cell. Divergence is an outcome, not an error: the
/// partial trajectory comes back marked.
pub fn run_cell(problem: &Problem, config: &ExperimentConfig, eta: f64, seed: u64) -> Result<Trajectory> {
    let obj = problem.objective.as_ref();
    let s = solver_settings(config, obj.count(), eta, seed);
    let w0 = problem.initial_point(seed);
    let result = match config.algorithm {
        Algorithm::Slbfgs => slbfgs_run(obj, &s, &w0),
        Algorithm::Svrg => svrg_run(obj, &s, &w0),
        Algorithm::Sqn => sqn_run(obj, &s, &SgdSchedule::new(config.schedule, eta)?, &w0),
        Algorithm::Sgd => {
            let sgd = SgdConfig {
                batch: s.batch,
                schedule: SgdSchedule::new(config.schedule, eta)?,
                steps: s.epochs * s.m,
                seed,
                record_every: s.record_every,
            };
            sgd_run(obj, &sgd, &w0)
        }
    };
    let mut trajectory = match result {
        Ok(out) => out.trajectory,
        Err(Error::Diverged { trajectory, passes }) => {
            log::info!("{} eta={eta} seed={seed} diverged after {passes:.3} passes", config.algorithm);
            *trajectory
        }
        Err(e) => return Err(e),
    };
    if let Some(r) = &problem.reference {
        trajectory.set_reference(r.f_star);
    }
    Ok(trajectory)
}

/// All cells, eta-major then seed, each independent of execution mode.
pub fn run_grid(
    problem: &Problem,
    config: &ExperimentConfig,
    etas: &[f64],
    seeds: &[u64],
    exec: Execution,
) -> Result<Vec<Trajectory>> {
    let cells: Vec<(f64, u64)> = etas
        .iter()
        .flat_map(|&eta| seeds.iter().map(move |&seed| (eta, seed)))
        .collect();
    exec.map(cells, |(eta, seed)| run_cell(problem, config, eta, seed))
        .into_iter()
        .collect()
}

fn final_metric(t: &Trajectory) -> f64 {
    if t.is_diverged() {
        return f64::INFINITY;
    }
    t.last().map_or(f64::INFINITY, |s| s.subopt.unwrap_or(s.fx))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// One row per `(algo, eta)`, in order of first appearance.
pub fn summarize(trajectories: &[Trajectory]) -> Vec<GridSummaryRow> {
    let mut keys: Vec<(Algorithm, u64)> = Vec::new();
    for t in trajectories {
        let key = (t.algo, t.eta.to_bits());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(algo, bits)| {
            let cells: Vec<&Trajectory> = trajectories
                .iter()
                .filter(|t| t.algo == algo && t.eta.to_bits() == bits)
                .collect();
            GridSummaryRow {
                algo,
                eta: f64::from_bits(bits),
                median_final_subopt: median(cells.iter().map(|t| final_metric(t)).collect()),
                diverged_cells: cells.iter().filter(|t| t.is_diverged()).count(),
                cells: cells.len(),
            }
        })
        .collect()
}

/// Step size with the lowest median final suboptimality; ties go to the
/// first row.
pub fn best_eta(summary: &[GridSummaryRow]) -> Option<f64> {
    summary
        .iter()
        .filter(|r| r.median_final_subopt.is_finite())
        .min_by(|a, b| a.median_final_subopt.total_cmp(&b.median_final_subopt))
        .map(|r| r.eta)
}

/// `grid.csv` → `grid.summary.csv`.
pub fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.csv")
}

pub fn write_summary(path: impl AsRef<Path>, rows: &[GridSummaryRow]) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "algo,eta,median_final_subopt,diverged_cells,cells").map_err(io)?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.algo,
            format_float(r.eta),
            format_float(r.median_final_subopt),
            r.diverged_cells,
            r.cells
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

/// A single `(eta, seed)` run written as CSV to `config.output`, if set.
pub fn cmd_run(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let etas = config.etas()?;
    let seeds = config.seeds();
    if etas.len() != 1 || seeds.len() != 1 {
        return Err(Error::invalid(format!(
            "run takes one step size and one seed, got {} and {} (use grid)",
            etas.len(),
            seeds.len()
        )));
    }
    let problem = Problem::build(config)?;
    let trajectory = run_cell(&problem, config, etas[0], seeds[0])?;
    if let Some(out) = &config.output {
        write_trajectory_file(out, std::slice::from_ref(&trajectory), config.timing)?;
    }
    Ok(RunReport {
        trajectory,
        reference: problem.reference,
    })
}

/// Every `(eta, seed)` cell, run concurrently up to `config.jobs`. Writes
/// the trajectories and, next to them, the per-eta summary.
pub fn cmd_grid(config: &ExperimentConfig) -> Result<GridReport> {
    config.validate()?;
    let etas = config.etas()?;
    let seeds = config.seeds();
    let problem = Problem::build(config)?;
    let exec = if config.jobs == Some(1) {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let trajectories = with_jobs(config.jobs, || run_grid(&problem, config, &etas, &seeds, exec))?;
    let summary = summarize(&trajectories);
    if let Some(out) = &config.output {
        write_trajectory_file(out, &trajectories, config.timing)?;
        write_summary(summary_path(out), &summary)?;
    }
    Ok(GridReport {
        best_eta: best_eta(&summary),
        trajectories,
        summary,
    })
}
