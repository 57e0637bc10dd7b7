//! Evaluation accounting. Cost is measured in single-example gradient and
//! Hessian-vector-product evaluations; dividing by `N` gives passes.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCounters {
    pub grad_components: u64,
    pub hvp_components: u64,
}

impl EvalCounters {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn charge_grad(&mut self, components: usize) {
        self.grad_components += components as u64;
    }

    pub fn charge_hvp(&mut self, components: usize) {
        self.hvp_components += components as u64;
    }

    pub fn total(&self) -> u64 {
        self.grad_components + self.hvp_components
    }

    pub fn passes(&self, n: usize) -> f64 {
        passes(self, n)
    }
}

/// `(grad_components + hvp_components) / n`
pub fn passes(counters: &EvalCounters, n: usize) -> f64 {
    assert!(n >= 1, "passes are defined for n >= 1");
    counters.total() as f64 / n as f64
}
