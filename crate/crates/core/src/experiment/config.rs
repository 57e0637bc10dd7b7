use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::SyntheticSpec;
use crate::optimizers::{Algorithm, IterateChoice, ScheduleKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    #[default]
    Ridge,
    SquaredHinge,
    MatrixCompletion,
}

impl ObjectiveKind {
    /// Regularization used when none is configured.
    pub fn default_reg(self) -> f64 {
        match self {
            Self::Ridge => 1e-3,
            Self::SquaredHinge => 0.0,
            Self::MatrixCompletion => 1e-4,
        }
    }
}

impl std::str::FromStr for ObjectiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ridge" => Ok(Self::Ridge),
            "squared_hinge" | "svm" => Ok(Self::SquaredHinge),
            "matrix_completion" => Ok(Self::MatrixCompletion),
            _ => Err(Error::invalid(format!(
                "unknown objective '{s}' (expected ridge, squared_hinge or matrix_completion)"
            ))),
        }
    }
}

/// Where the objective's data comes from. Exactly one of `data` and
/// `synthetic` must be set; `synthetic` applies to ridge only and its `reg`
/// field is replaced by `reg` here.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObjectiveSpec {
    pub kind: ObjectiveKind,
    /// LIBSVM file, or `i j rating` triples for matrix completion.
    pub data: Option<PathBuf>,
    /// Feature dimension override for LIBSVM input.
    pub dim: Option<usize>,
    pub synthetic: Option<SyntheticSpec>,
    pub reg: Option<f64>,
    /// Factor rank for matrix completion (default 10).
    pub rank: Option<usize>,
    /// Matrix shape for completion; inferred from the largest indices when absent.
    pub rows: Option<usize>,
    pub cols: Option<usize>,
}

impl ObjectiveSpec {
    pub fn reg(&self) -> f64 {
        self.reg.unwrap_or_else(|| self.kind.default_reg())
    }
}

/// `10^(lo + k/per_decade)` for `k = 0..=(hi − lo)·per_decade`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaGrid {
    pub lo_decade: i32,
    pub hi_decade: i32,
    #[serde(default = "default_per_decade")]
    pub per_decade: usize,
}

fn default_per_decade() -> usize {
    8
}

impl EtaGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.hi_decade < self.lo_decade || self.per_decade == 0 {
            return Err(Error::invalid("eta grid needs lo_decade <= hi_decade and per_decade > 0"));
        }
        let count = (self.hi_decade - self.lo_decade) as usize * self.per_decade;
        Ok((0..=count)
            .map(|k| 10f64.powf(self.lo_decade as f64 + k as f64 / self.per_decade as f64))
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferencePolicy {
    Precompute,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub objective: ObjectiveSpec,
    pub algorithm: Algorithm,
    /// Explicit step sizes; takes precedence over `eta_grid`.
    pub eta: Vec<f64>,
    pub eta_grid: Option<EtaGrid>,
    pub seeds: Vec<u64>,
    /// Minibatch size `b` (default `min(20, N)`).
    pub batch: Option<usize>,
    /// Hessian batch size `b_H` (default `10b`, capped at `N`).
    pub hessian_batch: Option<usize>,
    /// Hessian update interval `L`.
    pub hessian_interval: usize,
    /// Curvature memory `M`.
    pub memory: usize,
    /// Inner iterations per epoch `m` (default `N/b`).
    pub inner: Option<usize>,
    pub epochs: usize,
    /// Pass budget; overrides `epochs` so that every algorithm gets the same
    /// amount of work.
    pub max_passes: Option<f64>,
    pub iterate_choice: IterateChoice,
    pub record_every: Option<usize>,
    /// Step-size schedule for SGD and SQN.
    pub schedule: ScheduleKind,
    /// Defaults to `precompute` for convex objectives and `none` otherwise.
    pub reference: Option<ReferencePolicy>,
    pub reference_tol: f64,
    pub output: Option<PathBuf>,
    pub jobs: Option<usize>,
    /// Write wall-clock seconds into the CSV (makes it non-reproducible).
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            objective: ObjectiveSpec::default(),
            algorithm: Algorithm::Slbfgs,
            eta: Vec::new(),
            eta_grid: None,
            seeds: Vec::new(),
            batch: None,
            hessian_batch: None,
            hessian_interval: 10,
            memory: 10,
            inner: None,
            epochs: 10,
            max_passes: None,
            iterate_choice: IterateChoice::Last,
            record_every: None,
            schedule: ScheduleKind::Constant,
            reference: None,
            reference_tol: 1e-10,
            output: None,
            jobs: None,
            timing: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
    }

    /// Step sizes of the experiment: `eta` if given, else the grid.
    pub fn etas(&self) -> Result<Vec<f64>> {
        let etas = if !self.eta.is_empty() {
            self.eta.clone()
        } else if let Some(grid) = &self.eta_grid {
            grid.values()?
        } else {
            return Err(Error::invalid("no step size given (set `eta` or `eta_grid`)"));
        };
        if let Some(bad) = etas.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(Error::invalid(format!("step size must be positive, got {bad}")));
        }
        Ok(etas)
    }

    pub fn seeds(&self) -> Vec<u64> {
        if self.seeds.is_empty() {
            vec![0]
        } else {
            self.seeds.clone()
        }
    }

    pub fn reference_policy(&self) -> ReferencePolicy {
        self.reference.unwrap_or(match self.objective.kind {
            ObjectiveKind::MatrixCompletion => ReferencePolicy::None,
            _ => ReferencePolicy::Precompute,
        })
    }

    /// Checks everything that does not need the data.
    pub fn validate(&self) -> Result<()> {
        let o = &self.objective;
        match (&o.data, &o.synthetic) {
            (Some(_), Some(_)) => return Err(Error::invalid("set only one of `data` and `synthetic`")),
            (None, None) => return Err(Error::invalid("no data source (set `data` or `synthetic`)")),
            (None, Some(_)) if o.kind != ObjectiveKind::Ridge => {
                return Err(Error::invalid("synthetic data is only available for ridge"))
            }
            _ => {}
        }
        crate::objectives::check_reg(o.reg())?;
        if o.rank == Some(0) {
            return Err(Error::invalid("rank must be positive"));
        }
        self.etas()?;
        if self.epochs == 0 && self.max_passes.is_none() {
            return Err(Error::invalid("epochs must be positive"));
        }
        if let Some(p) = self.max_passes {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::invalid(format!("max_passes must be positive, got {p}")));
            }
        }
        if [self.batch, self.hessian_batch, self.inner, self.record_every, self.jobs].contains(&Some(0)) {
            return Err(Error::invalid("batch sizes, inner, record_every and jobs must be positive"));
        }
        if self.hessian_interval == 0 {
            return Err(Error::invalid("hessian_interval must be positive"));
        }
        if !(self.reference_tol.is_finite() && self.reference_tol > 0.0) {
            return Err(Error::invalid("reference_tol must be positive"));
        }
        if o.kind == ObjectiveKind::MatrixCompletion
            && self.reference_policy() == ReferencePolicy::Precompute
        {
            return Err(Error::invalid(
                "matrix completion is non-convex; use reference policy `none`",
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_has_eight_points_per_decade() {
        let g = EtaGrid { lo_decade: -3, hi_decade: 0, per_decade: 8 };
        let v = g.values().unwrap();
        assert_eq!(v.len(), 25);
        assert_eq!((v[0], v[8], v[24]), (1e-3, 1e-2, 1.0));
    }

    #[test]
    fn parses_json_with_defaults() {
        let c = ExperimentConfig::from_json(
            r#"{"objective": {"kind": "ridge", "synthetic": {"n": 100, "d": 5, "cond": 10, "noise": 0.1}},
                "algorithm": "sgd", "eta": [0.1], "schedule": "inv_t"}"#,
        )
        .unwrap();
        assert_eq!(c.algorithm, Algorithm::Sgd);
        assert_eq!(c.schedule, ScheduleKind::InvT);
        assert_eq!(c.objective.reg(), 1e-3);
        assert_eq!((c.memory, c.hessian_interval, c.seeds()), (10, 10, vec![0]));
        c.validate().unwrap();
        assert!(ExperimentConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn validation() {
        let mut c = ExperimentConfig { eta: vec![0.1], ..Default::default() };
        assert!(c.validate().is_err());
        c.objective.data = Some("x.svm".into());
        c.validate().unwrap();
        c.objective.kind = ObjectiveKind::MatrixCompletion;
        c.validate().unwrap();
        c.reference = Some(ReferencePolicy::Precompute);
        assert!(c.validate().is_err());
        let c = ExperimentConfig { eta: vec![-1.0], ..c };
        assert!(c.etas().is_err());
    }
}
