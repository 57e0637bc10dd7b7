use nalgebra::{DMatrix, DVector};

use super::{check_reg, Objective};
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Largest dimension for which [`Objective::direct_solution`] will assemble
/// the `d x d` normal equations.
pub const DIRECT_SOLVE_MAX_DIM: usize = 4000;

#[derive(Debug, Clone)]
pub struct RidgeObjective {
    data: Dataset,
    reg: f64,
}

impl RidgeObjective {
    pub fn new(data: Dataset, reg: f64) -> Result<Self> {
        check_reg(reg)?;
        Ok(Self { data, reg })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    /// Solves `(XᵀX/N + λI) w = Xᵀy/N` by Cholesky factorization.
    pub fn solve_normal_equations(&self) -> Result<Vec<f64>> {
        let d = self.data.dim();
        if d > DIRECT_SOLVE_MAX_DIM {
            return Err(Error::Resource(format!(
                "direct solve refused for dimension {d} > {DIRECT_SOLVE_MAX_DIM}"
            )));
        }
        let n = self.data.len();
        let mut gram = DMatrix::<f64>::zeros(d, d);
        let mut rhs = DVector::<f64>::zeros(d);
        for i in 0..n {
            let x = DVector::from_vec(self.data.row(i).to_dense(d));
            gram.ger(1.0, &x, &x, 1.0);
            rhs.axpy(self.data.label(i), &x, 1.0);
        }
        gram /= n as f64;
        rhs /= n as f64;
        for j in 0..d {
            gram[(j, j)] += self.reg;
        }
        let chol = gram.clone().cholesky().ok_or_else(|| {
            Error::AssumptionViolation(
                "normal equations are singular; ridge needs reg > 0 or full-rank data".into(),
            )
        })?;
        let mut w = chol.solve(&rhs);
        // One step of iterative refinement.
        let resid = &rhs - &gram * &w;
        w += chol.solve(&resid);
        Ok(w.as_slice().to_vec())
    }
}

impl Objective for RidgeObjective {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn count(&self) -> usize {
        self.data.len()
    }

    fn component_value(&self, i: usize, w: &[f64]) -> f64 {
        let r = self.data.row(i).dot(w) - self.data.label(i);
        0.5 * r * r + 0.5 * self.reg * crate::linalg::norm_sq(w)
    }

    fn add_component_grad(&self, i: usize, w: &[f64], acc: &mut [f64]) {
        let row = self.data.row(i);
        let r = row.dot(w) - self.data.label(i);
        let reg = self.reg;
        row.for_each_coord(w.len(), |j, x| acc[j] += r * x + reg * w[j]);
    }

    fn add_component_hvp(&self, i: usize, _w: &[f64], v: &[f64], acc: &mut [f64]) {
        let row = self.data.row(i);
        let s = row.dot(v);
        let reg = self.reg;
        row.for_each_coord(v.len(), |j, x| acc[j] += s * x + reg * v[j]);
    }

    fn regularization(&self) -> f64 {
        self.reg
    }

    fn direct_solution(&self) -> Option<Result<Vec<f64>>> {
        Some(self.solve_normal_equations())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counters::EvalCounters;
    use crate::data::SparseRow;
    use crate::objectives::testing::{fd_grad, fd_hvp, rel_err};
    use crate::rng::Prng;

    fn single(x: Vec<f64>, y: f64, reg: f64) -> RidgeObjective {
        let d = x.len();
        RidgeObjective::new(Dataset::dense(x, vec![y], d).unwrap(), reg).unwrap()
    }

    fn random_ridge(seed: u64, n: usize, d: usize, reg: f64) -> RidgeObjective {
        let mut p = Prng::new(seed);
        let data = Dataset::dense(p.normal_vec(n * d), p.normal_vec(n), d).unwrap();
        RidgeObjective::new(data, reg).unwrap()
    }

    #[test]
    fn worked_values() {
        let obj = single(vec![1.0, 0.0], 1.0, 0.0);
        assert_eq!(obj.value(&[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(obj.value(&[0.0, 0.0]).unwrap(), 0.5);
        let mut c = EvalCounters::new();
        assert_eq!(obj.grad(&[0], &[0.0, 0.0], &mut c).unwrap(), vec![-1.0, 0.0]);
        assert_eq!(c.grad_components, 1);
    }

    #[test]
    fn regularizer_only_gradient() {
        let obj = single(vec![1.0, 2.0], 3.0, 0.5);
        let w = [1.0, 1.0];
        let g = obj.grad(&[0], &w, &mut EvalCounters::new()).unwrap();
        assert_eq!(g, vec![0.5, 0.5]);
        assert!(rel_err(&fd_grad(&obj, &w, 1e-6), &g) <= 1e-5);
    }

    #[test]
    fn worked_hvp() {
        let obj = single(vec![1.0, 2.0], 0.0, 0.1);
        let v = [1.0, 0.0];
        let w = [0.3, -2.0];
        let mut c = EvalCounters::new();
        let hv = obj.hvp(&[0], &w, &v, &mut c).unwrap();
        assert!(rel_err(&hv, &[1.1, 2.0]) <= 1e-15);
        assert!(rel_err(&fd_hvp(&obj, &[0], &w, &v, 1e-5), &hv) <= 1e-5);
        assert_eq!(c.hvp_components, 1);
        assert_eq!(obj.hvp(&[0], &w, &[0.0, 0.0], &mut c).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn empty_batch_and_bad_dims() {
        let obj = single(vec![1.0, 2.0], 3.0, 0.5);
        let mut c = EvalCounters::new();
        assert!(obj.grad(&[], &[0.0, 0.0], &mut c).is_err());
        assert!(obj.hvp(&[], &[0.0, 0.0], &[1.0, 0.0], &mut c).is_err());
        assert!(obj.value(&[0.0]).is_err());
        assert!(obj.grad(&[1], &[0.0, 0.0], &mut c).is_err());
        assert_eq!(c, EvalCounters::new());
    }

    #[test]
    fn shape() {
        let obj = random_ridge(1, 3, 2, 0.1);
        assert_eq!((obj.count(), obj.dim()), (3, 2));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let obj = random_ridge(3, 40, 6, 1e-2);
        let mut p = Prng::new(99);
        for _ in 0..5 {
            let w = p.normal_vec(6);
            let g = obj.full_grad(&w, &mut EvalCounters::new()).unwrap();
            assert!(rel_err(&fd_grad(&obj, &w, 1e-6), &g) <= 1e-5);
        }
    }

    #[test]
    fn batch_gradient_is_average_of_singletons() {
        let obj = random_ridge(4, 30, 5, 0.3);
        let w = Prng::new(5).normal_vec(5);
        let batch = [1, 4, 9, 17, 29];
        let mut c = EvalCounters::new();
        let g = obj.grad(&batch, &w, &mut c).unwrap();
        let mut avg = vec![0.0; 5];
        for &i in &batch {
            let gi = obj.grad(&[i], &w, &mut c).unwrap();
            for (a, b) in avg.iter_mut().zip(&gi) {
                *a += b;
            }
        }
        for a in avg.iter_mut() {
            *a /= batch.len() as f64;
        }
        assert_eq!(g, avg);
        assert_eq!(c.grad_components, 10);
    }

    #[test]
    fn sparse_and_dense_storage_agree() {
        let dense = Dataset::dense(
            vec![0.0, 2.0, 0.0, 1.0, 0.0, -1.0],
            vec![1.0, -0.5],
            3,
        )
        .unwrap();
        let sparse = Dataset::sparse(
            vec![
                SparseRow::new(vec![1], vec![2.0]).unwrap(),
                SparseRow::new(vec![0, 2], vec![1.0, -1.0]).unwrap(),
            ],
            vec![1.0, -0.5],
            3,
        )
        .unwrap();
        let a = RidgeObjective::new(dense, 0.2).unwrap();
        let b = RidgeObjective::new(sparse, 0.2).unwrap();
        let w = [0.5, -1.0, 2.0];
        let mut c = EvalCounters::new();
        assert_eq!(a.value(&w).unwrap(), b.value(&w).unwrap());
        assert_eq!(
            a.full_grad(&w, &mut c).unwrap(),
            b.full_grad(&w, &mut c).unwrap()
        );
        assert_eq!(
            a.full_hvp(&w, &[1.0, 1.0, 1.0], &mut c).unwrap(),
            b.full_hvp(&w, &[1.0, 1.0, 1.0], &mut c).unwrap()
        );
    }

    #[test]
    fn direct_solution_zeroes_the_gradient() {
        let obj = random_ridge(8, 60, 7, 1e-3);
        let w = obj.solve_normal_equations().unwrap();
        let g = obj.full_grad(&w, &mut EvalCounters::new()).unwrap();
        assert!(crate::linalg::norm(&g) <= 1e-12);
    }

    #[test]
    fn strong_convexity_lower_bound_holds() {
        let obj = random_ridge(9, 25, 8, 0.05);
        let mut p = Prng::new(10);
        for _ in 0..20 {
            let w = p.normal_vec(8);
            let v = p.normal_vec(8);
            let hv = obj.full_hvp(&w, &v, &mut EvalCounters::new()).unwrap();
            assert!(crate::linalg::dot(&v, &hv) >= 0.05 * crate::linalg::norm_sq(&v));
        }
    }
}
