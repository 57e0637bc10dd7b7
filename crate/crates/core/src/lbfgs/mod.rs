//! Limited-memory BFGS inverse-Hessian approximation.
//!
//! [`LbfgsMemory`] keeps the `M` most recent accepted curvature pairs and
//! applies the implied operator `H` with the two-loop recursion in `O(Md)`.
//! The initial matrix is `(sᵀy / ‖y‖²) I` for the newest stored pair,
//! evaluated at application time; an empty memory is the identity.
//!
//! [`dense`] rebuilds `H` and its inverse `B` explicitly, for verification.

pub mod dense;

use std::collections::VecDeque;

pub use dense::{dense_b, dense_h, DENSE_MAX_DIM};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm};

/// Relative curvature threshold: a pair is stored only if
/// `sᵀy > CURVATURE_EPS · ‖s‖ · ‖y‖`.
pub const CURVATURE_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct CurvaturePair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

impl CurvaturePair {
    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// `1 / sᵀy`
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `sᵀy / ‖y‖²`
    pub fn initial_scaling(&self) -> f64 {
        1.0 / (self.rho * dot(&self.y, &self.y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PushOutcome {
    Accepted,
    /// Failed the curvature filter; memory unchanged.
    Rejected,
}

#[derive(Debug, Clone)]
pub struct LbfgsMemory {
    dim: usize,
    capacity: usize,
    pairs: VecDeque<CurvaturePair>,
    accepted: usize,
}

impl LbfgsMemory {
    pub fn new(dim: usize, capacity: usize) -> Self {
        Self {
            dim,
            capacity,
            pairs: VecDeque::with_capacity(capacity),
            accepted: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Total pairs accepted over the memory's lifetime, evicted ones included.
    pub fn accepted(&self) -> usize {
        self.accepted
    }

    /// Stored pairs, oldest first.
    pub fn pairs(&self) -> impl DoubleEndedIterator<Item = &CurvaturePair> + ExactSizeIterator {
        self.pairs.iter()
    }

    pub fn newest(&self) -> Option<&CurvaturePair> {
        self.pairs.back()
    }

    pub fn clear(&mut self) {
        self.pairs.clear();
    }

    pub fn push_pair(&mut self, s: Vec<f64>, y: Vec<f64>) -> Result<PushOutcome> {
        if s.len() != self.dim || y.len() != self.dim {
            return Err(Error::invalid(format!(
                "curvature pair dimensions ({}, {}) do not match memory dimension {}",
                s.len(),
                y.len(),
                self.dim
            )));
        }
        let sy = dot(&s, &y);
        let accept = sy.is_finite() && sy > CURVATURE_EPS * norm(&s) * norm(&y);
        if !accept {
            return Ok(PushOutcome::Rejected);
        }
        self.accepted += 1;
        if self.capacity == 0 {
            return Ok(PushOutcome::Accepted);
        }
        if self.pairs.len() == self.capacity {
            self.pairs.pop_front();
        }
        self.pairs.push_back(CurvaturePair { s, y, rho: 1.0 / sy });
        Ok(PushOutcome::Accepted)
    }

    /// `H v` by the two-loop recursion.
    pub fn two_loop_apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim {
            return Err(Error::invalid(format!(
                "vector has dimension {}, memory has {}",
                v.len(),
                self.dim
            )));
        }
        let mut q = v.to_vec();
        let Some(newest) = self.pairs.back() else {
            return Ok(q);
        };
        let mut alpha = Vec::with_capacity(self.pairs.len());
        for pair in self.pairs.iter().rev() {
            let a = pair.rho * dot(&pair.s, &q);
            axpy(-a, &pair.y, &mut q);
            alpha.push(a);
        }
        let gamma = newest.initial_scaling();
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
        for (pair, a) in self.pairs.iter().zip(alpha.iter().rev()) {
            let beta = pair.rho * dot(&pair.y, &q);
            axpy(a - beta, &pair.s, &mut q);
        }
        Ok(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rel_error;
    use crate::rng::Prng;
    use proptest::prelude::*;

    #[test]
    fn curvature_filter() {
        let mut mem = LbfgsMemory::new(2, 3);
        assert_eq!(
            mem.push_pair(vec![1.0, 0.0], vec![2.0, 0.0]).unwrap(),
            PushOutcome::Accepted
        );
        assert_eq!(mem.newest().unwrap().rho(), 0.5);
        assert_eq!(
            mem.push_pair(vec![1.0, 0.0], vec![0.0, 1.0]).unwrap(),
            PushOutcome::Rejected
        );
        assert_eq!(
            mem.push_pair(vec![1.0, 0.0], vec![-1.0, 0.0]).unwrap(),
            PushOutcome::Rejected
        );
        assert_eq!(mem.len(), 1);
        assert!(mem.push_pair(vec![1.0], vec![1.0]).is_err());
    }

    #[test]
    fn ring_buffer_evicts_oldest() {
        let mut mem = LbfgsMemory::new(1, 3);
        for k in 1..=4 {
            mem.push_pair(vec![k as f64], vec![1.0]).unwrap();
        }
        assert_eq!(mem.len(), 3);
        assert_eq!(mem.accepted(), 4);
        let ss: Vec<f64> = mem.pairs().map(|p| p.s()[0]).collect();
        assert_eq!(ss, vec![2.0, 3.0, 4.0]);
    }

    #[test]
    fn empty_memory_is_identity() {
        let mem = LbfgsMemory::new(2, 5);
        assert_eq!(mem.two_loop_apply(&[3.0, -1.0]).unwrap(), vec![3.0, -1.0]);
        assert!(mem.two_loop_apply(&[1.0]).is_err());
    }

    #[test]
    fn one_pair_worked_example() {
        let mut mem = LbfgsMemory::new(2, 1);
        mem.push_pair(vec![1.0, 0.0], vec![2.0, 0.0]).unwrap();
        assert_eq!(mem.two_loop_apply(&[1.0, 1.0]).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn secant_condition_for_newest_pair() {
        let mut p = Prng::new(17);
        let mut mem = LbfgsMemory::new(6, 4);
        for _ in 0..6 {
            let s = p.normal_vec(6);
            // y = A s with A = diag(1..6) keeps sᵀy > 0.
            let y: Vec<f64> = s.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v).collect();
            mem.push_pair(s, y).unwrap();
        }
        let newest = mem.newest().unwrap().clone();
        let hy = mem.two_loop_apply(newest.y()).unwrap();
        assert!(rel_error(&hy, newest.s()) <= 1e-10);
    }

    proptest! {
        #[test]
        fn operator_is_positive_definite(seed in any::<u64>(), d in 1usize..12, m in 0usize..6) {
            let mut p = Prng::new(seed);
            let mut mem = LbfgsMemory::new(d, m);
            for _ in 0..(m + 2) {
                let s = p.normal_vec(d);
                let y: Vec<f64> = s.iter().map(|v| v * (0.5 + p.uniform())).collect();
                mem.push_pair(s, y).unwrap();
            }
            let v = p.normal_vec(d);
            let hv = mem.two_loop_apply(&v).unwrap();
            prop_assert!(dot(&v, &hv) > 0.0);
        }
    }
}
