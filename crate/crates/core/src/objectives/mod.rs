//! Finite-sum objectives `f(w) = (1/N) Σ f_i(w)` behind one evaluation
//! interface: value, subsampled gradient, subsampled Hessian-vector product.
//!
//! Implementors provide per-example kernels; the batch averages are built
//! here by summing in the order the batch lists its indices (ascending for
//! every batch produced by [`crate::rng::sample_minibatch`]) and dividing by
//! the batch size. A kernel forms each coordinate's contribution completely
//! before adding it to the accumulator, so `grad(S, w)` is bit-identical to
//! the same average taken over the singleton gradients `grad({i}, w)`.

mod completion;
mod quadratic;
mod ridge;
mod svm;

pub use completion::{MatrixCompletionObjective, Rating};
pub use quadratic::IsotropicQuadratic;
pub use ridge::RidgeObjective;
pub use svm::SquaredHingeSvmObjective;

use crate::counters::EvalCounters;
use crate::data::Dataset;
use crate::error::{Error, Result};

pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    /// Number of components `N`.
    fn count(&self) -> usize;

    fn component_value(&self, i: usize, w: &[f64]) -> f64;

    /// `acc += ∇f_i(w)`
    fn add_component_grad(&self, i: usize, w: &[f64], acc: &mut [f64]);

    /// `acc += ∇²f_i(w) v`
    fn add_component_hvp(&self, i: usize, w: &[f64], v: &[f64], acc: &mut [f64]);

    /// Weight of the `(λ/2)‖·‖²` term carried by every component, or 0.
    fn regularization(&self) -> f64 {
        0.0
    }

    fn is_convex(&self) -> bool {
        true
    }

    /// Exact minimizer, for objectives that admit a direct solve.
    fn direct_solution(&self) -> Option<Result<Vec<f64>>> {
        None
    }

    fn value(&self, w: &[f64]) -> Result<f64> {
        check_dim("w", w, self.dim())?;
        let n = self.count();
        let mut acc = 0.0;
        for i in 0..n {
            acc += self.component_value(i, w);
        }
        Ok(acc / n as f64)
    }

    /// `(1/|S|) Σ_{i∈S} ∇f_i(w)`; charges `|S|` gradient components.
    fn grad(&self, batch: &[usize], w: &[f64], counters: &mut EvalCounters) -> Result<Vec<f64>> {
        check_batch(batch, self.count())?;
        check_dim("w", w, self.dim())?;
        let mut acc = vec![0.0; self.dim()];
        for &i in batch {
            self.add_component_grad(i, w, &mut acc);
        }
        finish_average(&mut acc, batch.len());
        counters.charge_grad(batch.len());
        Ok(acc)
    }

    /// Gradient over all `N` components; charges `N`.
    fn full_grad(&self, w: &[f64], counters: &mut EvalCounters) -> Result<Vec<f64>> {
        check_dim("w", w, self.dim())?;
        let n = self.count();
        let mut acc = vec![0.0; self.dim()];
        for i in 0..n {
            self.add_component_grad(i, w, &mut acc);
        }
        finish_average(&mut acc, n);
        counters.charge_grad(n);
        Ok(acc)
    }

    /// `∇²f_T(w) v`; charges `|T|` HVP components.
    fn hvp(
        &self,
        batch: &[usize],
        w: &[f64],
        v: &[f64],
        counters: &mut EvalCounters,
    ) -> Result<Vec<f64>> {
        check_batch(batch, self.count())?;
        check_dim("w", w, self.dim())?;
        check_dim("v", v, self.dim())?;
        let mut acc = vec![0.0; self.dim()];
        for &i in batch {
            self.add_component_hvp(i, w, v, &mut acc);
        }
        finish_average(&mut acc, batch.len());
        counters.charge_hvp(batch.len());
        Ok(acc)
    }

    fn full_hvp(&self, w: &[f64], v: &[f64], counters: &mut EvalCounters) -> Result<Vec<f64>> {
        check_dim("w", w, self.dim())?;
        check_dim("v", v, self.dim())?;
        let n = self.count();
        let mut acc = vec![0.0; self.dim()];
        for i in 0..n {
            self.add_component_hvp(i, w, v, &mut acc);
        }
        finish_average(&mut acc, n);
        counters.charge_hvp(n);
        Ok(acc)
    }
}

/// Ridge regression: `f_i(w) = ½(x_iᵀw − y_i)² + (λ/2)‖w‖²`.
pub fn make_ridge(dataset: Dataset, reg: f64) -> Result<RidgeObjective> {
    RidgeObjective::new(dataset, reg)
}

/// Squared-hinge SVM: `f_i(w) = max(0, 1 − y_i x_iᵀw)² + (λ/2)‖w‖²`.
pub fn make_squared_hinge(dataset: Dataset, reg: f64) -> Result<SquaredHingeSvmObjective> {
    SquaredHingeSvmObjective::new(dataset, reg)
}

/// Factored matrix completion over an `rows x cols` grid with rank `rank`.
pub fn make_matrix_completion(
    observations: Vec<Rating>,
    rows: usize,
    cols: usize,
    rank: usize,
    reg: f64,
) -> Result<MatrixCompletionObjective> {
    MatrixCompletionObjective::new(observations, rows, cols, rank, reg)
}

pub(crate) fn check_dim(name: &str, v: &[f64], dim: usize) -> Result<()> {
    if v.len() != dim {
        return Err(Error::invalid(format!(
            "{name} has dimension {}, expected {dim}",
            v.len()
        )));
    }
    Ok(())
}

pub(crate) fn check_reg(reg: f64) -> Result<()> {
    if !(reg.is_finite() && reg >= 0.0) {
        return Err(Error::invalid(format!(
            "regularization weight must be finite and >= 0, got {reg}"
        )));
    }
    Ok(())
}

fn check_batch(batch: &[usize], n: usize) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::invalid("empty index set"));
    }
    if let Some(&bad) = batch.iter().find(|&&i| i >= n) {
        return Err(Error::invalid(format!("index {bad} out of range for {n} components")));
    }
    Ok(())
}

fn finish_average(acc: &mut [f64], len: usize) {
    let len = len as f64;
    for a in acc.iter_mut() {
        *a /= len;
    }
}

#[cfg(test)]
pub(crate) mod testing {
    //! Central finite-difference oracles, independent of the analytic kernels.

    use super::Objective;
    use crate::counters::EvalCounters;

    pub fn fd_grad(obj: &dyn Objective, w: &[f64], h: f64) -> Vec<f64> {
        let mut out = vec![0.0; w.len()];
        let mut wp = w.to_vec();
        for j in 0..w.len() {
            wp[j] = w[j] + h;
            let fp = obj.value(&wp).unwrap();
            wp[j] = w[j] - h;
            let fm = obj.value(&wp).unwrap();
            wp[j] = w[j];
            out[j] = (fp - fm) / (2.0 * h);
        }
        out
    }

    pub fn fd_hvp(obj: &dyn Objective, batch: &[usize], w: &[f64], v: &[f64], h: f64) -> Vec<f64> {
        let mut c = EvalCounters::new();
        let plus: Vec<f64> = w.iter().zip(v).map(|(a, b)| a + h * b).collect();
        let minus: Vec<f64> = w.iter().zip(v).map(|(a, b)| a - h * b).collect();
        let gp = obj.grad(batch, &plus, &mut c).unwrap();
        let gm = obj.grad(batch, &minus, &mut c).unwrap();
        gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect()
    }

    /// Relative error measured against the larger of the two vectors' norms.
    pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let scale = crate::linalg::norm(a).max(crate::linalg::norm(b));
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }
}
