use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{gamma_bounds, SpectrumBounds};
use crate::counters::EvalCounters;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::norm_sq;
use crate::objectives::Objective;

/// Relative slack allowed on every bound.
pub const RELATIVE_SLACK: f64 = 1e-9;
/// Largest matrix dimension the dense checkers accept.
pub const CHECK_MAX_DIM: usize = 50;
/// Largest `N` for which the singleton-Hessian expectation is enumerated exactly.
pub const LEMMA4_MAX_N: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub trace: f64,
    pub trace_bound: f64,
    pub log_det: f64,
    pub log_det_bound: f64,
    pub trace_ok: bool,
    pub det_ok: bool,
}

impl Lemma1Report {
    pub fn holds(&self) -> bool {
        self.trace_ok && self.det_ok
    }

    pub fn det(&self) -> f64 {
        self.log_det.exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Report {
    pub eig_min: f64,
    pub eig_max: f64,
    pub gamma: f64,
    pub big_gamma: f64,
    pub within_bounds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma3Report {
    pub grad_norm_sq: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma4Report {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

fn check_spd(name: &str, m: &DMatrix<f64>) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let d = m.nrows();
    if d != m.ncols() {
        return Err(Error::invalid(format!("{name} is not square")));
    }
    if d > CHECK_MAX_DIM {
        return Err(Error::Resource(format!(
            "dense check refused for dimension {d} > {CHECK_MAX_DIM}"
        )));
    }
    let asym = (m - m.transpose()).amax();
    if asym > 1e-10 * m.amax() {
        return Err(Error::invalid(format!("{name} is not symmetric (max asymmetry {asym:e})")));
    }
    m.clone()
        .cholesky()
        .ok_or_else(|| Error::invalid(format!("{name} is not positive definite")))
}

/// `tr B ≤ (d+M)Λ` and `det B ≥ λ^{d+M} / ((d+M)Λ)^M`. The determinant is
/// compared in log space.
pub fn check_lemma1(b: &DMatrix<f64>, memory: usize, bounds: SpectrumBounds) -> Result<Lemma1Report> {
    bounds.validate()?;
    let chol = check_spd("B", b)?;
    let d = b.nrows();
    let dm = (d + memory) as f64;
    let trace = b.trace();
    let trace_bound = dm * bounds.big_lambda;
    let log_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let log_det_bound = dm * bounds.lambda.ln() - memory as f64 * (dm * bounds.big_lambda).ln();
    Ok(Lemma1Report {
        trace,
        trace_bound,
        log_det,
        log_det_bound,
        trace_ok: trace <= trace_bound * (1.0 + RELATIVE_SLACK),
        det_ok: log_det >= log_det_bound + (1.0 - RELATIVE_SLACK).ln(),
    })
}

/// `γI ⪯ H ⪯ ΓI`.
pub fn check_lemma2(h: &DMatrix<f64>, memory: usize, bounds: SpectrumBounds) -> Result<Lemma2Report> {
    check_spd("H", h)?;
    let (gamma, big_gamma) = gamma_bounds(h.nrows(), memory, bounds)?;
    let eig = h.clone().symmetric_eigenvalues();
    let eig_min = eig.min();
    let eig_max = eig.max();
    Ok(Lemma2Report {
        eig_min,
        eig_max,
        gamma,
        big_gamma,
        within_bounds: eig_min >= gamma * (1.0 - RELATIVE_SLACK)
            && eig_max <= big_gamma * (1.0 + RELATIVE_SLACK),
    })
}

/// Rounding error of `f(x) − f(y)` computed in floating point.
fn difference_roundoff(fx: f64, fy: f64) -> f64 {
    8.0 * f64::EPSILON * (fx.abs() + fy.abs())
}

/// `‖∇f(x)‖² ≥ 2λ (f(x) − f(w*))` for a `λ`-strongly convex objective.
pub fn check_lemma3(
    obj: &dyn Objective,
    w_star: &[f64],
    x: &[f64],
    lambda: f64,
) -> Result<Lemma3Report> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::AssumptionViolation(format!(
            "strong convexity parameter must be positive, got {lambda}"
        )));
    }
    let g = obj.full_grad(x, &mut EvalCounters::new())?;
    let grad_norm_sq = norm_sq(&g);
    let (fx, fs) = (obj.value(x)?, obj.value(w_star)?);
    let rhs = 2.0 * lambda * (fx - fs);
    let slack = RELATIVE_SLACK * grad_norm_sq.max(rhs.abs()) + 2.0 * lambda * difference_roundoff(fx, fs);
    Ok(Lemma3Report {
        grad_norm_sq,
        rhs,
        holds: grad_norm_sq >= rhs - slack,
    })
}

/// Enumerates `E‖v_t‖²` over all singleton minibatches and compares it with
/// `4Λ (f(x_t) − f(w*) + f(w_k) − f(w*))`.
pub fn check_lemma4(
    obj: &dyn Objective,
    x_t: &[f64],
    w_k: &[f64],
    w_star: &[f64],
    big_lambda: f64,
    exec: Execution,
) -> Result<Lemma4Report> {
    let n = obj.count();
    if n > LEMMA4_MAX_N {
        return Err(Error::Resource(format!(
            "enumeration over {n} components refused (limit {LEMMA4_MAX_N})"
        )));
    }
    let mu = obj.full_grad(w_k, &mut EvalCounters::new())?;
    let norms: Vec<Result<f64>> = exec.map_range(n, |i| {
        let mut c = EvalCounters::new();
        let v = crate::optimizers::vr_gradient(obj, &[i], x_t, w_k, &mu, &mut c)?;
        Ok(norm_sq(&v))
    });
    let mut total = 0.0;
    for v in norms {
        total += v?;
    }
    let lhs = total / n as f64;
    let (fx, fw, fs) = (obj.value(x_t)?, obj.value(w_k)?, obj.value(w_star)?);
    let rhs = 4.0 * big_lambda * ((fx - fs) + (fw - fs));
    let roundoff = 4.0 * big_lambda * (difference_roundoff(fx, fs) + difference_roundoff(fw, fs));
    let slack = RELATIVE_SLACK * lhs.max(rhs.abs()) + roundoff;
    Ok(Lemma4Report {
        lhs,
        rhs,
        holds: lhs <= rhs + slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::lbfgs::{dense_b, dense_h, LbfgsMemory};
    use crate::objectives::{IsotropicQuadratic, RidgeObjective};

    #[test]
    fn identity_memory() {
        let b = SpectrumBounds::new(1.0, 1.0);
        let id = DMatrix::<f64>::identity(2, 2);
        let r = check_lemma1(&id, 1, b).unwrap();
        assert_eq!((r.trace, r.trace_bound), (2.0, 3.0));
        assert!((r.det() - 1.0).abs() < 1e-15);
        assert!((r.log_det_bound.exp() - 1.0 / 3.0).abs() < 1e-15);
        assert!(r.holds());
        let r = check_lemma2(&id, 1, b).unwrap();
        assert_eq!((r.eig_min, r.eig_max), (1.0, 1.0));
        assert!(r.within_bounds);
    }

    #[test]
    fn worked_pair() {
        let mut mem = LbfgsMemory::new(2, 1);
        mem.push_pair(vec![1.0, 0.0], vec![2.0, 0.0]).unwrap();
        let b = SpectrumBounds::new(1.0, 2.0);
        let r = check_lemma1(&dense_b(&mem, 2).unwrap(), 1, b).unwrap();
        assert_eq!((r.trace, r.trace_bound), (4.0, 6.0));
        assert!((r.det() - 4.0).abs() < 1e-12);
        assert!((r.log_det_bound.exp() - 1.0 / 6.0).abs() < 1e-15);
        assert!(r.holds());
        let r = check_lemma2(&dense_h(&mem, 2).unwrap(), 1, b).unwrap();
        assert_eq!((r.eig_min, r.eig_max), (0.5, 0.5));
        assert!(r.within_bounds && r.big_gamma == 36.0);
    }

    #[test]
    fn rejects_bad_matrices() {
        let b = SpectrumBounds::new(1.0, 1.0);
        let nonsym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(check_lemma1(&nonsym, 1, b), Err(Error::InvalidArgument(_))));
        let indef = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(check_lemma2(&indef, 1, b), Err(Error::InvalidArgument(_))));
        let big = DMatrix::<f64>::identity(51, 51);
        assert!(matches!(check_lemma1(&big, 1, b), Err(Error::Resource(_))));
    }

    #[test]
    fn lemma3_is_tight_for_isotropic_quadratic() {
        let lambda = 0.7;
        let obj = IsotropicQuadratic::new(vec![0.0], 1, lambda).unwrap();
        for x in [-3.0, 0.5, 2.0] {
            let r = check_lemma3(&obj, &[0.0], &[x], lambda).unwrap();
            assert!(r.holds);
            assert!((r.grad_norm_sq - r.rhs).abs() <= 1e-14 * r.rhs);
        }
        let r = check_lemma3(&obj, &[0.0], &[0.0], lambda).unwrap();
        assert_eq!((r.grad_norm_sq, r.rhs), (0.0, 0.0));
        assert!(r.holds);
    }

    #[test]
    fn lemma4_two_point_enumeration() {
        // f_1 = ½(w − 1)², f_2 = ½(w + 1)², w* = 0, Λ = 1.
        let obj = RidgeObjective::new(
            Dataset::dense(vec![1.0, 1.0], vec![1.0, -1.0], 1).unwrap(),
            0.0,
        )
        .unwrap();
        let r = check_lemma4(&obj, &[1.0], &[1.0], &[0.0], 1.0, Execution::Sequential).unwrap();
        assert_eq!((r.lhs, r.rhs), (1.0, 4.0));
        assert!(r.holds);
        let r = check_lemma4(&obj, &[0.0], &[0.0], &[0.0], 1.0, Execution::Parallel).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        assert!(r.holds);
    }
}
