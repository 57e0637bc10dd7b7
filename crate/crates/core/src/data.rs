//! Feature rows and labelled datasets.

use crate::error::{Error, Result};

/// Coordinate-format sparse row. Indices are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRow {
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseRow {
    pub fn new(indices: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::invalid(format!(
                "sparse row has {} indices but {} values",
                indices.len(),
                values.len()
            )));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("sparse row indices must be strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("sparse row contains a non-finite value"));
        }
        Ok(Self { indices, values })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn dot(&self, w: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (j, x) in self.iter() {
            acc += x * w[j];
        }
        acc
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    fn max_index(&self) -> Option<usize> {
        self.indices.last().copied()
    }
}

/// Storage for all rows of a dataset. A dataset is either entirely dense or
/// entirely sparse.
#[derive(Debug, Clone, PartialEq)]
pub enum Rows {
    /// Row-major `n x d` block.
    Dense(Vec<f64>),
    Sparse(Vec<SparseRow>),
}

/// Borrowed view of one feature row.
#[derive(Debug, Clone, Copy)]
pub enum RowRef<'a> {
    Dense(&'a [f64]),
    Sparse(&'a SparseRow),
}

impl RowRef<'_> {
    pub fn dot(&self, w: &[f64]) -> f64 {
        match self {
            RowRef::Dense(x) => crate::linalg::dot(x, w),
            RowRef::Sparse(row) => row.dot(w),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        match self {
            RowRef::Dense(x) => crate::linalg::norm_sq(x),
            RowRef::Sparse(row) => row.norm_sq(),
        }
    }

    /// Writes `out[j] += f(j, x_j)` over all `d` coordinates, with `x_j = 0`
    /// outside the stored entries of a sparse row. Each coordinate's
    /// contribution is formed before it is added to `out`.
    #[inline]
    pub fn for_each_coord(&self, d: usize, mut f: impl FnMut(usize, f64)) {
        match self {
            RowRef::Dense(x) => {
                for (j, &xj) in x.iter().enumerate() {
                    f(j, xj);
                }
            }
            RowRef::Sparse(row) => {
                let mut next = row.iter().peekable();
                for j in 0..d {
                    match next.peek() {
                        Some(&(idx, v)) if idx == j => {
                            next.next();
                            f(j, v);
                        }
                        _ => f(j, 0.0),
                    }
                }
            }
        }
    }

    pub fn to_dense(&self, d: usize) -> Vec<f64> {
        let mut out = vec![0.0; d];
        self.for_each_coord(d, |j, x| out[j] = x);
        out
    }
}

/// `N` labelled examples of dimension `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: Rows,
    labels: Vec<f64>,
    dim: usize,
}

impl Dataset {
    pub fn dense(data: Vec<f64>, labels: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dataset dimension must be positive"));
        }
        if labels.is_empty() {
            return Err(Error::invalid("dataset must contain at least one example"));
        }
        if data.len() != labels.len() * dim {
            return Err(Error::invalid(format!(
                "dense block has {} entries, expected {} x {}",
                data.len(),
                labels.len(),
                dim
            )));
        }
        if data.iter().chain(&labels).any(|v| !v.is_finite()) {
            return Err(Error::invalid("dataset contains a non-finite value"));
        }
        Ok(Self {
            rows: Rows::Dense(data),
            labels,
            dim,
        })
    }

    pub fn sparse(rows: Vec<SparseRow>, labels: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dataset dimension must be positive"));
        }
        if labels.is_empty() {
            return Err(Error::invalid("dataset must contain at least one example"));
        }
        if rows.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        if let Some(max) = rows.iter().filter_map(SparseRow::max_index).max() {
            if max >= dim {
                return Err(Error::invalid(format!(
                    "row index {max} out of range for dimension {dim}"
                )));
            }
        }
        if labels.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("dataset contains a non-finite label"));
        }
        Ok(Self {
            rows: Rows::Sparse(rows),
            labels,
            dim,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn rows(&self) -> &Rows {
        &self.rows
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.rows, Rows::Sparse(_))
    }

    pub fn row(&self, i: usize) -> RowRef<'_> {
        match &self.rows {
            Rows::Dense(data) => RowRef::Dense(&data[i * self.dim..(i + 1) * self.dim]),
            Rows::Sparse(rows) => RowRef::Sparse(&rows[i]),
        }
    }

    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }
}
