//! Stochastic L-BFGS with variance reduction.
//!
//! The crate minimizes finite sums `f(w) = (1/N) Σ f_i(w)` with a stochastic
//! L-BFGS method whose search direction multiplies an SVRG-style
//! variance-reduced gradient by an inverse-Hessian approximation built from
//! subsampled Hessian-vector products. SVRG, SQN and SGD baselines share the
//! same objectives, sampling and cost accounting (passes through the data).
//!
//! * [`objectives`]: ridge, squared-hinge SVM, factored matrix completion.
//! * [`lbfgs`]: curvature-pair memory, two-loop recursion, dense oracles.
//! * [`optimizers`]: `slbfgs_run`, `svrg_run`, `sqn_run`, `sgd_run`.
//! * [`analysis`]: theory constants and numerical checks of the bounds that
//!   underpin the linear convergence rate.
//! * [`io`]: LIBSVM parsing, synthetic problems, reference solutions, CSV.
//! * [`experiment`]: the run / grid / verify drivers behind the CLI.

pub mod analysis;
pub mod counters;
pub mod data;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod io;
pub mod lbfgs;
pub mod linalg;
pub mod objectives;
pub mod optimizers;
pub mod rng;

pub use counters::{passes, EvalCounters};
pub use data::{Dataset, SparseRow};
pub use error::{Error, Result};
pub use exec::Execution;
pub use lbfgs::{LbfgsMemory, PushOutcome};
pub use objectives::Objective;
pub use optimizers::{
    sgd_run, slbfgs_run, sqn_run, svrg_run, Algorithm, IterateChoice, RunOutput, SgdConfig,
    SgdSchedule, SlbfgsConfig, Trajectory,
};
pub use rng::{sample_minibatch, Prng};
