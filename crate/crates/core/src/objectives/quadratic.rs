use super::{check_dim, Objective};
use crate::error::{Error, Result};

/// `f_i(w) = (κ/2)‖w − c_i‖²`. Every subsampled Hessian equals `κI`, which
/// makes this the reference instance for checks that need `λ = Λ`.
#[derive(Debug, Clone)]
pub struct IsotropicQuadratic {
    centers: Vec<f64>,
    dim: usize,
    curvature: f64,
}

impl IsotropicQuadratic {
    /// `centers` is row-major `n x dim`.
    pub fn new(centers: Vec<f64>, dim: usize, curvature: f64) -> Result<Self> {
        if dim == 0 || centers.is_empty() || !centers.len().is_multiple_of(dim) {
            return Err(Error::invalid("centers must form a nonempty n x dim block"));
        }
        if !(curvature.is_finite() && curvature > 0.0) {
            return Err(Error::invalid("curvature must be positive"));
        }
        Ok(Self {
            centers,
            dim,
            curvature,
        })
    }

    pub fn curvature(&self) -> f64 {
        self.curvature
    }

    fn center(&self, i: usize) -> &[f64] {
        &self.centers[i * self.dim..(i + 1) * self.dim]
    }

    /// The minimizer: the mean of the centers.
    pub fn minimizer(&self) -> Vec<f64> {
        let n = self.count();
        let mut mean = vec![0.0; self.dim];
        for i in 0..n {
            for (m, c) in mean.iter_mut().zip(self.center(i)) {
                *m += c;
            }
        }
        for m in mean.iter_mut() {
            *m /= n as f64;
        }
        mean
    }
}

impl Objective for IsotropicQuadratic {
    fn dim(&self) -> usize {
        self.dim
    }

    fn count(&self) -> usize {
        self.centers.len() / self.dim
    }

    fn component_value(&self, i: usize, w: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (wj, cj) in w.iter().zip(self.center(i)) {
            acc += (wj - cj) * (wj - cj);
        }
        0.5 * self.curvature * acc
    }

    fn add_component_grad(&self, i: usize, w: &[f64], acc: &mut [f64]) {
        let k = self.curvature;
        for ((a, wj), cj) in acc.iter_mut().zip(w).zip(self.center(i)) {
            *a += k * (wj - cj);
        }
    }

    fn add_component_hvp(&self, _i: usize, _w: &[f64], v: &[f64], acc: &mut [f64]) {
        let k = self.curvature;
        for (a, vj) in acc.iter_mut().zip(v) {
            *a += k * vj;
        }
    }

    fn direct_solution(&self) -> Option<Result<Vec<f64>>> {
        let w = self.minimizer();
        Some(check_dim("minimizer", &w, self.dim).map(|_| w))
    }
}
