use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::reference::{ReferenceMethod, ReferenceSolution};
use crate::counters::EvalCounters;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::objectives::{Objective, RidgeObjective};
use crate::rng::{streams, Prng};

/// Shape of a synthetic ridge problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    /// Ratio of the extreme singular values of `X / √N`.
    pub cond: f64,
    /// Standard deviation of the label noise.
    pub noise: f64,
    #[serde(default)]
    pub reg: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::invalid("synthetic N and d must be positive"));
        }
        if self.d > self.n {
            return Err(Error::invalid(format!(
                "cannot control the spectrum of a {}x{} design (d > N)",
                self.n, self.d
            )));
        }
        if !(self.cond.is_finite() && self.cond >= 1.0) {
            return Err(Error::invalid(format!("cond must be >= 1, got {}", self.cond)));
        }
        if self.d == 1 && self.cond != 1.0 {
            return Err(Error::invalid("a one-column design has cond = 1"));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(Error::invalid(format!("noise must be >= 0, got {}", self.noise)));
        }
        crate::objectives::check_reg(self.reg)
    }
}

/// Parses `N,d,cond,noise`; `reg` and `seed` default to zero.
impl FromStr for SyntheticSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || Error::invalid(format!("expected N,d,cond,noise, got `{s}`"));
        if parts.len() != 4 {
            return Err(bad());
        }
        Ok(Self {
            n: parts[0].parse().map_err(|_| bad())?,
            d: parts[1].parse().map_err(|_| bad())?,
            cond: parts[2].parse().map_err(|_| bad())?,
            noise: parts[3].parse().map_err(|_| bad())?,
            reg: 0.0,
            seed: 0,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticProblem {
    pub dataset: Dataset,
    pub reference: ReferenceSolution,
    pub w_true: Vec<f64>,
}

/// Ridge data with a prescribed spectrum and its exact optimum.
pub fn gen_synthetic_ridge(spec: &SyntheticSpec) -> Result<(Dataset, ReferenceSolution)> {
    let p = gen_synthetic_ridge_with_truth(spec)?;
    Ok((p.dataset, p.reference))
}

/// Builds `X = √N U diag(σ) Vᵀ` with orthonormal `U` (N×d), orthogonal `V`
/// and `σ_j = cond^{-j/(d-1)}`, labels `y = X w_true + noise·ξ`, and solves
/// the regularized problem through the same factors:
/// `w* = V (Σ² + λI)⁻¹ Σ Uᵀ y / √N`.
pub fn gen_synthetic_ridge_with_truth(spec: &SyntheticSpec) -> Result<SyntheticProblem> {
    spec.validate()?;
    let (n, d) = (spec.n, spec.d);
    let mut prng = Prng::stream(spec.seed, streams::DATA);
    let g = DMatrix::from_fn(n, d, |_, _| prng.normal());
    let u = g.qr().q();
    let h = DMatrix::from_fn(d, d, |_, _| prng.normal());
    let v = h.qr().q();
    let sigma = DVector::from_fn(d, |j, _| {
        if d == 1 {
            1.0
        } else {
            spec.cond.powf(-(j as f64) / (d - 1) as f64)
        }
    });
    let scale = (n as f64).sqrt();
    let x = (&u * DMatrix::from_diagonal(&sigma) * v.transpose()) * scale;

    let w_true = DVector::from_vec(prng.normal_vec(d));
    let mut y = &x * &w_true;
    if spec.noise > 0.0 {
        for yi in y.iter_mut() {
            *yi += spec.noise * prng.normal();
        }
    }

    let uty = u.transpose() * &y / scale;
    let coef = DVector::from_fn(d, |j, _| sigma[j] * uty[j] / (sigma[j] * sigma[j] + spec.reg));
    let w_star: Vec<f64> = (&v * coef).iter().copied().collect();

    let mut data = Vec::with_capacity(n * d);
    for i in 0..n {
        data.extend(x.row(i).iter());
    }
    let dataset = Dataset::dense(data, y.iter().copied().collect(), d)?;
    let obj = RidgeObjective::new(dataset.clone(), spec.reg)?;
    let f_star = obj.value(&w_star)?;
    let grad_norm = norm(&obj.full_grad(&w_star, &mut EvalCounters::new())?);
    Ok(SyntheticProblem {
        dataset,
        reference: ReferenceSolution {
            w_star,
            f_star,
            method: ReferenceMethod::DirectSolve,
            tolerance: grad_norm,
        },
        w_true: w_true.iter().copied().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(cond: f64, noise: f64, reg: f64) -> SyntheticSpec {
        SyntheticSpec { n: 300, d: 12, cond, noise, reg, seed: 5 }
    }

    fn design(data: &Dataset) -> DMatrix<f64> {
        DMatrix::from_fn(data.len(), data.dim(), |i, j| data.row(i).to_dense(data.dim())[j])
    }

    #[test]
    fn interpolation_recovers_truth() {
        let p = gen_synthetic_ridge_with_truth(&spec(1.0, 0.0, 0.0)).unwrap();
        assert!(p.reference.f_star.abs() < 1e-20);
        let err = p.reference.w_star.iter().zip(&p.w_true).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn condition_number_within_five_percent() {
        for cond in [1.0, 10.0, 100.0, 1000.0] {
            let (data, _) = gen_synthetic_ridge(&spec(cond, 0.1, 0.0)).unwrap();
            let sv = design(&data).singular_values();
            let ratio = sv.max() / sv.min();
            assert!((ratio / cond - 1.0).abs() <= 0.05, "cond {cond}: ratio {ratio}");
        }
    }

    #[test]
    fn reference_gradient_vanishes() {
        for s in [spec(10.0, 0.1, 1e-3), spec(1000.0, 1.0, 0.0), spec(100.0, 0.5, 0.1)] {
            let (_, r) = gen_synthetic_ridge(&s).unwrap();
            assert!(r.tolerance <= 1e-10, "{}", r.tolerance);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = gen_synthetic_ridge(&spec(10.0, 0.1, 1e-3)).unwrap();
        let b = gen_synthetic_ridge(&spec(10.0, 0.1, 1e-3)).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1.w_star, b.1.w_star);
        let c = gen_synthetic_ridge(&SyntheticSpec { seed: 6, ..spec(10.0, 0.1, 1e-3) }).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn infeasible_specs() {
        assert!(gen_synthetic_ridge(&SyntheticSpec { n: 5, d: 6, ..spec(1.0, 0.0, 0.0) }).is_err());
        assert!(gen_synthetic_ridge(&SyntheticSpec { d: 1, ..spec(10.0, 0.0, 0.0) }).is_err());
        assert!(gen_synthetic_ridge(&spec(0.5, 0.0, 0.0)).is_err());
        assert!("10,2,1".parse::<SyntheticSpec>().is_err());
        let s: SyntheticSpec = "1000,50,10,0.1".parse().unwrap();
        assert_eq!((s.n, s.d, s.cond, s.noise), (1000, 50, 10.0, 0.1));
    }
}
