use serde::{Deserialize, Serialize};

use crate::counters::EvalCounters;
use crate::error::{Error, Result};
use crate::lbfgs::LbfgsMemory;
use crate::linalg::{dot, norm};
use crate::objectives::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMethod {
    DirectSolve,
    LongRun,
}

/// A precomputed optimum used to report suboptimality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSolution {
    pub w_star: Vec<f64>,
    pub f_star: f64,
    pub method: ReferenceMethod,
    /// Gradient norm achieved at `w_star`.
    pub tolerance: f64,
}

const MAX_ITERS: usize = 20_000;
const MEMORY: usize = 20;
const MAX_BACKTRACKS: usize = 60;

/// Optimum of a convex objective with `‖∇f(w*)‖ ≤ tol`.
///
/// Uses the objective's direct solve when it has one and polishes the result
/// with full-gradient L-BFGS if the gradient is still above `tol`. Other
/// objectives start L-BFGS from zero.
pub fn compute_reference(obj: &dyn Objective, tol: f64) -> Result<ReferenceSolution> {
    if !obj.is_convex() {
        return Err(Error::invalid(
            "reference solutions are only defined for convex objectives",
        ));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let mut counters = EvalCounters::new();
    let (start, method) = match obj.direct_solution() {
        Some(w) => (w?, ReferenceMethod::DirectSolve),
        None => (vec![0.0; obj.dim()], ReferenceMethod::LongRun),
    };
    let g = obj.full_grad(&start, &mut counters)?;
    if norm(&g) <= tol {
        return Ok(ReferenceSolution {
            f_star: obj.value(&start)?,
            tolerance: norm(&g),
            w_star: start,
            method,
        });
    }
    let (w_star, f_star, grad_norm) = lbfgs_minimize(obj, start, tol)?;
    Ok(ReferenceSolution {
        w_star,
        f_star,
        method: ReferenceMethod::LongRun,
        tolerance: grad_norm,
    })
}

/// Deterministic full-gradient L-BFGS with Armijo backtracking. Once `f`
/// changes fall below roundoff, a step is accepted when it reduces the
/// gradient norm instead.
fn lbfgs_minimize(obj: &dyn Objective, mut x: Vec<f64>, tol: f64) -> Result<(Vec<f64>, f64, f64)> {
    let mut counters = EvalCounters::new();
    let mut memory = LbfgsMemory::new(obj.dim(), MEMORY);
    let mut f = obj.value(&x)?;
    let mut g = obj.full_grad(&x, &mut counters)?;
    let mut gnorm = norm(&g);
    let mut reset = false;
    for _ in 0..MAX_ITERS {
        if gnorm <= tol {
            return Ok((x, f, gnorm));
        }
        let mut dir: Vec<f64> = memory.two_loop_apply(&g)?.into_iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        let not_descent = !(slope < 0.0);
        if not_descent {
            memory.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }
        let mut t = if memory.is_empty() { 1.0 / gnorm.max(1.0) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let xn: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + t * b).collect();
            let fnew = obj.value(&xn)?;
            if fnew.is_finite() {
                let armijo = fnew <= f + 1e-4 * t * slope;
                let flat = (fnew - f).abs() <= 8.0 * f64::EPSILON * f.abs().max(fnew.abs());
                if armijo || flat {
                    let gn = obj.full_grad(&xn, &mut counters)?;
                    if armijo || norm(&gn) < gnorm {
                        accepted = Some((xn, fnew, gn));
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((xn, fnew, gn)) => {
                let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
                memory.push_pair(s, y)?;
                x = xn;
                f = fnew;
                g = gn;
                gnorm = norm(&g);
                reset = false;
            }
            None if !reset && !memory.is_empty() => {
                memory.clear();
                reset = true;
            }
            None => break,
        }
    }
    if gnorm <= tol {
        return Ok((x, f, gnorm));
    }
    Err(Error::Convergence {
        reason: format!("gradient norm above {tol:e} after the iteration budget"),
        best_grad_norm: gnorm,
        best: x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::io::{gen_synthetic_ridge, SyntheticSpec};
    use crate::objectives::{make_matrix_completion, make_squared_hinge, Rating, RidgeObjective};
    use crate::rng::Prng;

    fn svm_instance() -> Dataset {
        let mut p = Prng::new(3);
        let (n, d) = (200, 4);
        let x = p.normal_vec(n * d);
        let labels = (0..n)
            .map(|i| if x[i * d] + p.normal() > 0.0 { 1.0 } else { -1.0 })
            .collect();
        Dataset::dense(x, labels, d).unwrap()
    }

    #[test]
    fn ridge_agrees_with_closed_form() {
        let spec = SyntheticSpec { n: 400, d: 20, cond: 100.0, noise: 0.1, reg: 1e-3, seed: 2 };
        let (data, closed) = gen_synthetic_ridge(&spec).unwrap();
        let obj = RidgeObjective::new(data, 1e-3).unwrap();
        let r = compute_reference(&obj, 1e-10).unwrap();
        assert_eq!(r.method, ReferenceMethod::DirectSolve);
        assert!((r.f_star - closed.f_star).abs() <= 1e-8 * closed.f_star.abs());
    }

    #[test]
    fn svm_long_run_reaches_tolerance() {
        for reg in [0.0, 1e-2] {
            let obj = make_squared_hinge(svm_instance(), reg).unwrap();
            let r = compute_reference(&obj, 1e-10).unwrap();
            assert_eq!(r.method, ReferenceMethod::LongRun);
            let g = obj.full_grad(&r.w_star, &mut EvalCounters::new()).unwrap();
            assert!(norm(&g) <= 1e-10);
            assert_eq!(norm(&g), r.tolerance);
        }
    }

    #[test]
    fn matrix_completion_is_refused() {
        let obs = vec![Rating { row: 0, col: 0, value: 1.0 }];
        let obj = make_matrix_completion(obs, 1, 1, 1, 1e-4).unwrap();
        assert!(matches!(compute_reference(&obj, 1e-8), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn budget_exhaustion_reports_best() {
        let obj = make_squared_hinge(svm_instance(), 1e-2).unwrap();
        match compute_reference(&obj, 1e-300) {
            Err(Error::Convergence { best, best_grad_norm, .. }) => {
                assert_eq!(best.len(), 4);
                assert!(best_grad_norm < 1e-8);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }
}
