//! `slbfgs`: single runs, step-size grids, reference solutions and theory
//! checks, emitting long-format CSV.
//!
//! Exit status: 0 on success (diverged grid cells included), 1 on usage,
//! configuration or I/O errors, 2 when `verify` finds a violated bound.

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use slbfgs::analysis::SpectrumBounds;
use slbfgs::experiment::{
    cmd_grid, cmd_reference, cmd_run, cmd_verify, EtaGrid, ExperimentConfig, ObjectiveKind,
    ReferencePolicy, VerifyConfig,
};
use slbfgs::io::{format_float, write_trajectories, SyntheticSpec};
use slbfgs::optimizers::{IterateChoice, ScheduleKind};
use slbfgs::Algorithm;

#[derive(Parser)]
#[command(name = "slbfgs", version, about = "Stochastic L-BFGS experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One step size, one seed; writes the trajectory CSV.
    Run(ExperimentArgs),
    /// Every (eta, seed) cell; writes trajectories plus a per-eta summary.
    Grid(ExperimentArgs),
    /// Computes the reference optimum of the configured objective.
    Reference(ExperimentArgs),
    /// Numerical checks of the bounds behind the linear rate.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    algo: Option<Algorithm>,
    /// Step sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    eta: Vec<f64>,
    /// Log grid `lo,hi[,per_decade]` over decades, e.g. `-3,0` for 1e-3..1.
    #[arg(long, value_name = "LO,HI[,PER]")]
    eta_grid: Option<String>,
    /// Seeds, comma separated.
    #[arg(long, alias = "seed", env = "SLBFGS_SEED", value_delimiter = ',')]
    seeds: Vec<u64>,
    /// Maximum concurrent grid cells.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output path (CSV for run/grid, JSON for reference). Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// LIBSVM file, or `i j rating` triples for matrix completion.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Synthetic ridge problem `N,d,cond,noise`.
    #[arg(long, value_name = "N,d,COND,NOISE")]
    synthetic: Option<SyntheticSpec>,
    /// Seed of the synthetic generator.
    #[arg(long)]
    data_seed: Option<u64>,
    #[arg(long)]
    reg: Option<f64>,
    /// ridge, squared_hinge or matrix_completion.
    #[arg(long)]
    objective: Option<ObjectiveKind>,
    /// Feature dimension override for LIBSVM input.
    #[arg(long)]
    dim: Option<usize>,
    /// Factor rank for matrix completion.
    #[arg(long)]
    rank: Option<usize>,
    /// SGD/SQN schedule: constant, inv_sqrt or inv_t.
    #[arg(long)]
    schedule: Option<ScheduleKind>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Pass budget; overrides --epochs.
    #[arg(long)]
    passes: Option<f64>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    hessian_batch: Option<usize>,
    /// Hessian update interval L.
    #[arg(long)]
    interval: Option<usize>,
    /// Curvature memory M.
    #[arg(long)]
    memory: Option<usize>,
    /// Inner iterations per epoch m.
    #[arg(long)]
    inner: Option<usize>,
    /// Next outer iterate: last or random.
    #[arg(long)]
    iterate: Option<IterateChoice>,
    #[arg(long)]
    record_every: Option<usize>,
    /// precompute or none.
    #[arg(long, value_parser = parse_policy)]
    reference: Option<ReferencePolicy>,
    /// Write wall-clock seconds into the CSV.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,5,10,20,50")]
    dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10")]
    memories: Vec<usize>,
    /// Eigenvalue bounds `lambda,Lambda` of the random curvature matrices.
    #[arg(long, value_name = "LAMBDA,BIG_LAMBDA", default_value = "0.1,10")]
    spectrum: String,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, env = "SLBFGS_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 30)]
    contraction_seeds: usize,
    #[arg(long, default_value_t = 3)]
    contraction_epochs: usize,
    #[arg(long)]
    jobs: Option<usize>,
}

fn parse_policy(s: &str) -> Result<ReferencePolicy, String> {
    match s {
        "precompute" => Ok(ReferencePolicy::Precompute),
        "none" => Ok(ReferencePolicy::None),
        _ => Err(format!("expected precompute or none, got `{s}`")),
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|p| p.trim().parse().ok())
        .collect::<Option<Vec<T>>>()
        .with_context(|| format!("invalid {what} `{s}`"))
}

impl ExperimentArgs {
    fn into_config(self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::from_json_file(path)?,
            None => ExperimentConfig::default(),
        };
        let o = &mut c.objective;
        if let Some(kind) = self.objective {
            o.kind = kind;
        }
        if let Some(path) = self.data {
            o.data = Some(path);
            o.synthetic = None;
        }
        if let Some(spec) = self.synthetic {
            o.synthetic = Some(spec);
            o.data = None;
        }
        if let (Some(seed), Some(spec)) = (self.data_seed, o.synthetic.as_mut()) {
            spec.seed = seed;
        }
        o.reg = self.reg.or(o.reg);
        o.dim = self.dim.or(o.dim);
        o.rank = self.rank.or(o.rank);
        if let Some(algo) = self.algo {
            c.algorithm = algo;
        }
        if !self.eta.is_empty() {
            c.eta = self.eta;
            c.eta_grid = None;
        }
        if let Some(grid) = self.eta_grid {
            let v: Vec<i32> = parse_list(&grid, "eta grid")?;
            if !(2..=3).contains(&v.len()) || v.get(2).is_some_and(|p| *p <= 0) {
                bail!("eta grid must be LO,HI[,PER], got `{grid}`");
            }
            c.eta_grid = Some(EtaGrid {
                lo_decade: v[0],
                hi_decade: v[1],
                per_decade: v.get(2).map_or(8, |p| *p as usize),
            });
            c.eta.clear();
        }
        if !self.seeds.is_empty() {
            c.seeds = self.seeds;
        }
        c.jobs = self.jobs.or(c.jobs);
        c.output = self.out.or(c.output);
        c.schedule = self.schedule.unwrap_or(c.schedule);
        c.epochs = self.epochs.unwrap_or(c.epochs);
        c.max_passes = self.passes.or(c.max_passes);
        c.batch = self.batch.or(c.batch);
        c.hessian_batch = self.hessian_batch.or(c.hessian_batch);
        c.hessian_interval = self.interval.unwrap_or(c.hessian_interval);
        c.memory = self.memory.unwrap_or(c.memory);
        c.inner = self.inner.or(c.inner);
        c.iterate_choice = self.iterate.unwrap_or(c.iterate_choice);
        c.record_every = self.record_every.or(c.record_every);
        c.reference = self.reference.or(c.reference);
        c.timing |= self.timing;
        Ok(c)
    }
}

fn run(args: ExperimentArgs) -> Result<()> {
    let config = args.into_config()?;
    let report = cmd_run(&config)?;
    let t = &report.trajectory;
    if config.output.is_none() {
        write_trajectories(std::slice::from_ref(t), io::stdout().lock(), config.timing)?;
    }
    let last = t.last().context("empty trajectory")?;
    match t.diverged_at {
        Some(passes) => eprintln!("{} eta={} seed={}: diverged after {passes:.3} passes", t.algo, t.eta, t.seed),
        None => eprintln!(
            "{} eta={} seed={}: f = {} after {:.3} passes{}",
            t.algo,
            t.eta,
            t.seed,
            format_float(last.fx),
            last.passes,
            last.subopt.map_or(String::new(), |s| format!(", f - f* = {}", format_float(s)))
        ),
    }
    Ok(())
}

fn grid(args: ExperimentArgs) -> Result<()> {
    let config = args.into_config()?;
    let report = cmd_grid(&config)?;
    if config.output.is_none() {
        write_trajectories(&report.trajectories, io::stdout().lock(), config.timing)?;
    }
    let mut err = io::stderr().lock();
    writeln!(err, "algo,eta,median_final_subopt,diverged_cells,cells")?;
    for r in &report.summary {
        writeln!(
            err,
            "{},{},{},{},{}",
            r.algo,
            format_float(r.eta),
            format_float(r.median_final_subopt),
            r.diverged_cells,
            r.cells
        )?;
    }
    match report.best_eta {
        Some(eta) => writeln!(err, "best eta: {}", format_float(eta))?,
        None => writeln!(err, "best eta: none (every cell diverged)")?,
    }
    Ok(())
}

fn reference(args: ExperimentArgs) -> Result<()> {
    let config = args.into_config()?;
    let r = cmd_reference(&config)?;
    let json = serde_json::to_string_pretty(&r)?;
    match &config.output {
        Some(path) => std::fs::write(path, json).with_context(|| format!("{}", path.display()))?,
        None => println!("{json}"),
    }
    eprintln!(
        "f* = {} ({:?}, gradient norm {:e})",
        format_float(r.f_star),
        r.method,
        r.tolerance
    );
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<bool> {
    let s: Vec<f64> = parse_list(&args.spectrum, "spectrum")?;
    if s.len() != 2 {
        bail!("spectrum must be LAMBDA,BIG_LAMBDA, got `{}`", args.spectrum);
    }
    let config = VerifyConfig {
        dims: args.dims,
        memories: args.memories,
        spectrum: SpectrumBounds::new(s[0], s[1]),
        trials: args.trials,
        seed: args.seed,
        contraction_seeds: args.contraction_seeds,
        contraction_epochs: args.contraction_epochs,
        jobs: args.jobs,
    };
    let report = cmd_verify(&config)?;
    println!("{report}");
    Ok(report.passed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a).map(|_| true),
        Command::Grid(a) => grid(a).map(|_| true),
        Command::Reference(a) => reference(a).map(|_| true),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
