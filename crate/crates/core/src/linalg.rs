//! Dense symmetric matrices and the Cholesky factorization `A = UᵀU`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("matrix is not symmetric: entry ({i}, {j}) differs from ({j}, {i})")]
    NotSymmetric { i: usize, j: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
}

/// Relative symmetry tolerance accepted by [`SymMatrix::new`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Pivots below `PIVOT_TOL * max diagonal` are treated as a rank deficiency.
pub const PIVOT_TOL: f64 = 1e-13;

/// Dense symmetric matrix, stored row-major in full.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds a matrix from row-major data, rejecting asymmetric input.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != dim * dim {
            return Err(LinalgError::DimensionMismatch {
                expected: dim * dim,
                actual: data.len(),
            });
        }
        let scale = data.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
        for i in 0..dim {
            for j in (i + 1)..dim {
                if (data[i * dim + j] - data[j * dim + i]).abs() > SYMMETRY_TOL * scale {
                    return Err(LinalgError::NotSymmetric { i, j });
                }
            }
        }
        Ok(Self { dim, data })
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Self { dim, data }
    }

    /// Builds a matrix from its lower triangle via `f(i, j)` for `j <= i`.
    pub fn from_lower_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..=i {
                let v = f(i, j);
                data[i * dim + j] = v;
                data[j * dim + i] = v;
            }
        }
        Self { dim, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `xᵀAx`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

/// Upper-triangular factor `U` with strictly positive diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperTriangular {
    dim: usize,
    data: Vec<f64>,
}

impl UpperTriangular {
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Row `i` restricted to its nonzero part, i.e. columns `i..dim`.
    pub fn row_tail(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim + i..(i + 1) * self.dim]
    }

    /// `UᵀU`, used to check reconstructions.
    pub fn gram(&self) -> SymMatrix {
        let n = self.dim;
        SymMatrix::from_lower_fn(n, |i, j| (0..=j).map(|k| self.get(k, i) * self.get(k, j)).sum())
    }
}

/// Right-looking Cholesky factorization without pivoting.
pub fn cholesky(a: &SymMatrix) -> Result<UpperTriangular, LinalgError> {
    let n = a.dim();
    let max_diag = (0..n).fold(0.0f64, |acc, i| acc.max(a.get(i, i).abs()));
    let tol = PIVOT_TOL * max_diag;
    // Work on the upper triangle in place.
    let mut w = a.as_slice().to_vec();
    for k in 0..n {
        let pivot = w[k * n + k];
        if !(pivot > tol) || pivot <= 0.0 {
            return Err(LinalgError::NotPositiveDefinite { index: k, pivot });
        }
        let d = pivot.sqrt();
        w[k * n + k] = d;
        for j in (k + 1)..n {
            w[k * n + j] /= d;
        }
        for i in (k + 1)..n {
            let uki = w[k * n + i];
            if uki == 0.0 {
                continue;
            }
            for j in i..n {
                w[i * n + j] -= uki * w[k * n + j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            w[i * n + j] = 0.0;
        }
    }
    Ok(UpperTriangular { dim: n, data: w })
}

/// `z = U y`.
pub fn apply_upper(u: &UpperTriangular, y: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if y.len() != u.dim() {
        return Err(LinalgError::DimensionMismatch {
            expected: u.dim(),
            actual: y.len(),
        });
    }
    Ok((0..u.dim())
        .map(|i| u.row_tail(i).iter().zip(&y[i..]).map(|(a, b)| a * b).sum())
        .collect())
}
