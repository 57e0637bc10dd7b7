use super::config::{ExperimentConfig, ObjectiveKind, ReferencePolicy};
use crate::error::{Error, Result};
use crate::io::{
    compute_reference, gen_synthetic_ridge, read_libsvm_file, read_ratings_file, ReferenceSolution,
    SyntheticSpec,
};
use crate::objectives::{make_matrix_completion, make_ridge, make_squared_hinge, Objective};
use crate::rng::{streams, Prng};

const DEFAULT_RANK: usize = 10;
const COMPLETION_INIT_SCALE: f64 = 1e-5;

/// An objective ready to optimize, plus its reference optimum if requested.
pub struct Problem {
    pub kind: ObjectiveKind,
    pub objective: Box<dyn Objective>,
    pub reference: Option<ReferenceSolution>,
}

impl Problem {
    pub fn build(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        Self::build_with(config, config.reference_policy())
    }

    fn build_with(config: &ExperimentConfig, policy: ReferencePolicy) -> Result<Self> {
        let spec = &config.objective;
        let reg = spec.reg();
        let want_reference = policy == ReferencePolicy::Precompute;
        if let Some(synthetic) = &spec.synthetic {
            let (data, reference) = gen_synthetic_ridge(&SyntheticSpec {
                reg,
                ..synthetic.clone()
            })?;
            return Ok(Self {
                kind: ObjectiveKind::Ridge,
                objective: Box::new(make_ridge(data, reg)?),
                reference: want_reference.then_some(reference),
            });
        }
        let path = spec
            .data
            .as_ref()
            .ok_or_else(|| Error::invalid("no data source (set `data` or `synthetic`)"))?;
        let objective: Box<dyn Objective> = match spec.kind {
            ObjectiveKind::Ridge => Box::new(make_ridge(read_libsvm_file(path, spec.dim)?, reg)?),
            ObjectiveKind::SquaredHinge => {
                Box::new(make_squared_hinge(read_libsvm_file(path, spec.dim)?, reg)?)
            }
            ObjectiveKind::MatrixCompletion => {
                let ratings = read_ratings_file(path)?;
                let rows = spec
                    .rows
                    .unwrap_or_else(|| ratings.iter().map(|r| r.row + 1).max().unwrap_or(1));
                let cols = spec
                    .cols
                    .unwrap_or_else(|| ratings.iter().map(|r| r.col + 1).max().unwrap_or(1));
                let rank = spec.rank.unwrap_or(DEFAULT_RANK);
                Box::new(make_matrix_completion(ratings, rows, cols, rank, reg)?)
            }
        };
        let reference = if want_reference {
            Some(compute_reference(objective.as_ref(), config.reference_tol)?)
        } else {
            None
        };
        Ok(Self {
            kind: spec.kind,
            objective,
            reference,
        })
    }

    /// Zero, except for matrix completion, whose factors start at small
    /// Gaussian noise to break the symmetry of the all-zero point.
    pub fn initial_point(&self, seed: u64) -> Vec<f64> {
        let d = self.objective.dim();
        match self.kind {
            ObjectiveKind::MatrixCompletion => {
                let mut prng = Prng::stream(seed, streams::INIT);
                (0..d).map(|_| COMPLETION_INIT_SCALE * prng.normal()).collect()
            }
            _ => vec![0.0; d],
        }
    }
}

/// Reference optimum of the configured objective.
pub fn cmd_reference(config: &ExperimentConfig) -> Result<ReferenceSolution> {
    let mut checked = config.clone();
    if checked.eta.is_empty() && checked.eta_grid.is_none() {
        checked.eta = vec![1.0];
    }
    checked.reference = Some(ReferencePolicy::Precompute);
    checked.validate()?;
    let problem = Problem::build_with(&checked, ReferencePolicy::Precompute)?;
    Ok(problem.reference.expect("reference requested"))
}
