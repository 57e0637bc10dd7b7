use serde::{Deserialize, Serialize};

use super::{check_reg, Objective};
use crate::error::{Error, Result};

/// Upper bound on the packed factor length `(rows + cols) * rank`.
pub const MAX_PARAMETERS: usize = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rating {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// Low-rank factorization fit to observed entries.
///
/// The parameter vector packs the row factors `L` (`rows x rank`,
/// row-major) followed by the column factors `R` (`cols x rank`). Each
/// observation `(i, j, r)` is one component:
/// `((L Rᵀ)_ij − r)² + (λ/2)(‖L_i‖² + ‖R_j‖²)`.
#[derive(Debug, Clone)]
pub struct MatrixCompletionObjective {
    ratings: Vec<Rating>,
    rows: usize,
    cols: usize,
    rank: usize,
    reg: f64,
}

impl MatrixCompletionObjective {
    pub fn new(ratings: Vec<Rating>, rows: usize, cols: usize, rank: usize, reg: f64) -> Result<Self> {
        check_reg(reg)?;
        if rank == 0 || rows == 0 || cols == 0 {
            return Err(Error::invalid("rows, cols and rank must be positive"));
        }
        rows
            .checked_add(cols)
            .and_then(|s| s.checked_mul(rank))
            .filter(|&p| p <= MAX_PARAMETERS)
            .ok_or_else(|| {
                Error::Resource(format!(
                    "({rows} + {cols}) x {rank} factor parameters exceed {MAX_PARAMETERS}"
                ))
            })?;
        if ratings.is_empty() {
            return Err(Error::invalid("no observations"));
        }
        if let Some(bad) = ratings
            .iter()
            .find(|r| r.row >= rows || r.col >= cols || !r.value.is_finite())
        {
            return Err(Error::invalid(format!(
                "observation ({}, {}, {}) outside a {rows} x {cols} grid or non-finite",
                bad.row, bad.col, bad.value
            )));
        }
        Ok(Self {
            ratings,
            rows,
            cols,
            rank,
            reg,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn ratings(&self) -> &[Rating] {
        &self.ratings
    }

    fn offsets(&self, i: usize) -> (usize, usize) {
        let r = self.ratings[i];
        (r.row * self.rank, (self.rows + r.col) * self.rank)
    }

    fn residual(&self, i: usize, w: &[f64]) -> f64 {
        let (lo, ro) = self.offsets(i);
        let k = self.rank;
        crate::linalg::dot(&w[lo..lo + k], &w[ro..ro + k]) - self.ratings[i].value
    }
}

impl Objective for MatrixCompletionObjective {
    fn dim(&self) -> usize {
        (self.rows + self.cols) * self.rank
    }

    fn count(&self) -> usize {
        self.ratings.len()
    }

    fn component_value(&self, i: usize, w: &[f64]) -> f64 {
        let (lo, ro) = self.offsets(i);
        let k = self.rank;
        let e = self.residual(i, w);
        let norms = crate::linalg::norm_sq(&w[lo..lo + k]) + crate::linalg::norm_sq(&w[ro..ro + k]);
        e * e + 0.5 * self.reg * norms
    }

    fn add_component_grad(&self, i: usize, w: &[f64], acc: &mut [f64]) {
        let (lo, ro) = self.offsets(i);
        let e2 = 2.0 * self.residual(i, w);
        let reg = self.reg;
        for l in 0..self.rank {
            let (li, rj) = (w[lo + l], w[ro + l]);
            acc[lo + l] += e2 * rj + reg * li;
            acc[ro + l] += e2 * li + reg * rj;
        }
    }

    fn add_component_hvp(&self, i: usize, w: &[f64], v: &[f64], acc: &mut [f64]) {
        let (lo, ro) = self.offsets(i);
        let k = self.rank;
        let e2 = 2.0 * self.residual(i, w);
        let (li, rj) = (&w[lo..lo + k], &w[ro..ro + k]);
        let (a, c) = (&v[lo..lo + k], &v[ro..ro + k]);
        // Directional derivative of the prediction L_i·R_j along (a, c).
        let q2 = 2.0 * (crate::linalg::dot(rj, a) + crate::linalg::dot(li, c));
        let reg = self.reg;
        for l in 0..k {
            acc[lo + l] += q2 * rj[l] + e2 * c[l] + reg * a[l];
            acc[ro + l] += q2 * li[l] + e2 * a[l] + reg * c[l];
        }
    }

    fn regularization(&self) -> f64 {
        self.reg
    }

    fn is_convex(&self) -> bool {
        false
    }
}
