//! Stochastic optimizers: variance-reduced stochastic L-BFGS and the SVRG,
//! SQN and SGD baselines. Every run is sequential and fully determined by
//! its seed; runs report a pass-accounted [`Trajectory`].

mod curvature;
mod sgd;
mod slbfgs;
mod sqn;
mod trajectory;
mod vr;

pub use sgd::{sgd_run, SgdConfig};
pub use slbfgs::{slbfgs_run, svrg_run};
pub use sqn::sqn_run;
pub use trajectory::{Sample, Trajectory};
pub use vr::vr_gradient;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::counters::EvalCounters;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    #[default]
    Slbfgs,
    Svrg,
    Sqn,
    Sgd,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Self::Slbfgs, Self::Svrg, Self::Sqn, Self::Sgd];

    pub fn name(self) -> &'static str {
        match self {
            Self::Slbfgs => "slbfgs",
            Self::Svrg => "svrg",
            Self::Sqn => "sqn",
            Self::Sgd => "sgd",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown algorithm '{s}'")))
    }
}

/// How the next outer iterate is picked from the inner loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IterateChoice {
    /// The final inner iterate `x_m`.
    #[default]
    Last,
    /// `x_i` for `i` uniform on `0..m`.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    #[default]
    Constant,
    InvSqrt,
    InvT,
}

impl FromStr for IterateChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "last" => Ok(Self::Last),
            "random" => Ok(Self::Random),
            _ => Err(Error::invalid(format!(
                "unknown iterate choice '{s}' (expected last or random)"
            ))),
        }
    }
}

impl FromStr for ScheduleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(Self::Constant),
            "inv_sqrt" => Ok(Self::InvSqrt),
            "inv_t" => Ok(Self::InvT),
            _ => Err(Error::invalid(format!(
                "unknown schedule '{s}' (expected constant, inv_sqrt or inv_t)"
            ))),
        }
    }
}

/// Step-size schedule indexed by the global inner-step counter `t ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgdSchedule {
    pub kind: ScheduleKind,
    pub eta0: f64,
}

impl SgdSchedule {
    pub fn new(kind: ScheduleKind, eta0: f64) -> Result<Self> {
        if !(eta0.is_finite() && eta0 > 0.0) {
            return Err(Error::invalid(format!("step size must be positive, got {eta0}")));
        }
        Ok(Self { kind, eta0 })
    }

    pub fn constant(eta0: f64) -> Self {
        Self {
            kind: ScheduleKind::Constant,
            eta0,
        }
    }

    pub fn step(&self, t: u64) -> f64 {
        let t1 = (t + 1) as f64;
        match self.kind {
            ScheduleKind::Constant => self.eta0,
            ScheduleKind::InvSqrt => self.eta0 / t1.sqrt(),
            ScheduleKind::InvT => self.eta0 / t1,
        }
    }
}

/// Parameters of a variance-reduced (or SQN) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlbfgsConfig {
    /// Step size.
    pub eta: f64,
    /// Inner iterations per epoch.
    pub m: usize,
    /// Curvature-pair memory size. 0 disables Hessian updates.
    pub memory: usize,
    /// Inner steps between Hessian updates.
    pub hessian_interval: usize,
    pub batch: usize,
    pub hessian_batch: usize,
    pub epochs: usize,
    pub seed: u64,
    pub iterate_choice: IterateChoice,
    /// Inner-step stride for trajectory samples; `None` records epoch ends only.
    pub record_every: Option<usize>,
}

impl SlbfgsConfig {
    /// `b = 20`, `b_H = 10b`, `L = 10`, `M = 10`, `m = N/b`.
    pub fn defaults_for(n: usize, eta: f64) -> Self {
        let batch = 20.min(n).max(1);
        Self {
            eta,
            m: (n / batch).max(1),
            memory: 10,
            hessian_interval: 10,
            batch,
            hessian_batch: (10 * batch).min(n),
            epochs: 10,
            seed: 0,
            iterate_choice: IterateChoice::Last,
            record_every: None,
        }
    }

    pub(crate) fn validate(&self, n: usize, curvature: bool) -> Result<()> {
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::invalid(format!("step size must be positive, got {}", self.eta)));
        }
        if self.m == 0 {
            return Err(Error::invalid("inner iteration count m must be positive"));
        }
        if self.batch == 0 || self.batch > n {
            return Err(Error::invalid(format!("batch size {} must be in 1..={n}", self.batch)));
        }
        if self.record_every == Some(0) {
            return Err(Error::invalid("record_every must be positive"));
        }
        if curvature && self.memory > 0 {
            if self.hessian_interval == 0 {
                return Err(Error::invalid("Hessian update interval L must be positive"));
            }
            if self.hessian_batch == 0 || self.hessian_batch > n {
                return Err(Error::invalid(format!(
                    "Hessian batch size {} must be in 1..={n}",
                    self.hessian_batch
                )));
            }
            if self.hessian_interval > self.m {
                log::warn!(
                    "Hessian update interval L={} exceeds inner iterations m={}",
                    self.hessian_interval,
                    self.m
                );
            }
        }
        Ok(())
    }
}

/// Final iterate, trajectory and evaluation counts of a completed run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub w: Vec<f64>,
    pub trajectory: Trajectory,
    pub counters: EvalCounters,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules() {
        let s = SgdSchedule::new(ScheduleKind::InvT, 2.0).unwrap();
        assert_eq!(s.step(0), 2.0);
        assert_eq!(s.step(9), 0.2);
        let s = SgdSchedule::new(ScheduleKind::InvSqrt, 2.0).unwrap();
        assert_eq!(s.step(3), 1.0);
        assert_eq!(SgdSchedule::constant(0.3).step(1000), 0.3);
        assert!(SgdSchedule::new(ScheduleKind::Constant, 0.0).is_err());
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("adam".parse::<Algorithm>().is_err());
    }

    #[test]
    fn defaults_follow_batch_rules() {
        let c = SlbfgsConfig::defaults_for(1000, 0.1);
        assert_eq!(
            (c.batch, c.hessian_batch, c.hessian_interval, c.memory, c.m),
            (20, 200, 10, 10, 50)
        );
    }
}
