use super::{check_reg, Objective};
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Squared-hinge support vector machine.
///
/// The per-example Hessian is `2 x xᵀ + λI` while the margin `y xᵀw` is
/// below 1 and `λI` otherwise. At a margin of exactly 1 the inactive branch
/// is used.
#[derive(Debug, Clone)]
pub struct SquaredHingeSvmObjective {
    data: Dataset,
    reg: f64,
}

impl SquaredHingeSvmObjective {
    pub fn new(data: Dataset, reg: f64) -> Result<Self> {
        check_reg(reg)?;
        if let Some((i, y)) = data
            .labels()
            .iter()
            .enumerate()
            .find(|(_, &y)| y != 1.0 && y != -1.0)
        {
            return Err(Error::invalid(format!(
                "SVM labels must be -1 or +1; example {i} has label {y}"
            )));
        }
        Ok(Self { data, reg })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    fn margin(&self, i: usize, w: &[f64]) -> f64 {
        self.data.label(i) * self.data.row(i).dot(w)
    }
}

impl Objective for SquaredHingeSvmObjective {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn count(&self) -> usize {
        self.data.len()
    }

    fn component_value(&self, i: usize, w: &[f64]) -> f64 {
        let slack = (1.0 - self.margin(i, w)).max(0.0);
        slack * slack + 0.5 * self.reg * crate::linalg::norm_sq(w)
    }

    fn add_component_grad(&self, i: usize, w: &[f64], acc: &mut [f64]) {
        let margin = self.margin(i, w);
        let reg = self.reg;
        let row = self.data.row(i);
        if margin < 1.0 {
            let coef = -2.0 * (1.0 - margin) * self.data.label(i);
            row.for_each_coord(w.len(), |j, x| acc[j] += coef * x + reg * w[j]);
        } else {
            for (a, wj) in acc.iter_mut().zip(w) {
                *a += reg * wj;
            }
        }
    }

    fn add_component_hvp(&self, i: usize, w: &[f64], v: &[f64], acc: &mut [f64]) {
        let reg = self.reg;
        if self.margin(i, w) < 1.0 {
            let row = self.data.row(i);
            let s = 2.0 * row.dot(v);
            row.for_each_coord(v.len(), |j, x| acc[j] += s * x + reg * v[j]);
        } else {
            for (a, vj) in acc.iter_mut().zip(v) {
                *a += reg * vj;
            }
        }
    }

    fn regularization(&self) -> f64 {
        self.reg
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counters::EvalCounters;
    use crate::objectives::testing::{fd_grad, fd_hvp, rel_err};
    use crate::rng::Prng;

    fn random_svm(seed: u64, n: usize, d: usize, reg: f64) -> SquaredHingeSvmObjective {
        let mut p = Prng::new(seed);
        let x = p.normal_vec(n * d);
        let y = (0..n)
            .map(|_| if p.uniform() < 0.5 { -1.0 } else { 1.0 })
            .collect();
        SquaredHingeSvmObjective::new(Dataset::dense(x, y, d).unwrap(), reg).unwrap()
    }

    #[test]
    fn inactive_hinge_is_zero() {
        let data = Dataset::dense(vec![1.0, 0.0], vec![1.0], 2).unwrap();
        let obj = SquaredHingeSvmObjective::new(data, 0.0).unwrap();
        assert_eq!(obj.value(&[2.0, 0.0]).unwrap(), 0.0);
        assert_eq!(obj.value(&[0.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn rejects_non_binary_labels() {
        let data = Dataset::dense(vec![1.0, 0.0], vec![0.5], 2).unwrap();
        assert!(matches!(
            SquaredHingeSvmObjective::new(data, 0.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn hessian_at_the_kink_uses_inactive_branch() {
        let data = Dataset::dense(vec![1.0, 0.0], vec![1.0], 2).unwrap();
        let obj = SquaredHingeSvmObjective::new(data, 0.25).unwrap();
        let hv = obj
            .hvp(&[0], &[1.0, 0.0], &[1.0, 1.0], &mut EvalCounters::new())
            .unwrap();
        assert_eq!(hv, vec![0.25, 0.25]);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let obj = random_svm(21, 50, 6, 1e-2);
        let mut p = Prng::new(22);
        let all: Vec<usize> = (0..50).collect();
        for _ in 0..5 {
            let w = p.normal_vec(6);
            let v = p.normal_vec(6);
            let mut c = EvalCounters::new();
            let g = obj.full_grad(&w, &mut c).unwrap();
            assert!(rel_err(&fd_grad(&obj, &w, 1e-6), &g) <= 1e-5);
            let hv = obj.hvp(&all, &w, &v, &mut c).unwrap();
            assert!(rel_err(&fd_hvp(&obj, &all, &w, &v, 1e-6), &hv) <= 1e-4);
        }
    }
}
