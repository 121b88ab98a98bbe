//! Dense row-major matrices and the small vector helpers used throughout.

use serde::{Deserialize, Serialize};

pub type DenseVector = Vec<f64>;

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        DenseMatrix {
            nrows,
            ncols,
            data: vec![0.0; nrows * ncols],
        }
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DenseMatrix::zeros(nrows, ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                m.data[i * ncols + j] = f(i, j);
            }
        }
        m
    }

    /// Builds from a flat row-major slice; `data.len()` must equal `nrows * ncols`.
    pub fn from_row_major(nrows: usize, ncols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), nrows * ncols);
        DenseMatrix { nrows, ncols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.ncols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.ncols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn col(&self, j: usize) -> DenseVector {
        (0..self.nrows).map(|i| self.get(i, j)).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[f64]) {
        assert_eq!(v.len(), self.nrows);
        for (i, &x) in v.iter().enumerate() {
            self.set(i, j, x);
        }
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.ncols, self.nrows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.ncols, other.nrows);
        let mut out = DenseMatrix::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            for l in 0..self.ncols {
                let a = self.get(i, l);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.ncols {
                    out.data[i * out.ncols + j] += a * other.get(l, j);
                }
            }
        }
        out
    }

    /// `self * v` for a dense vector.
    pub fn matvec(&self, v: &[f64]) -> DenseVector {
        assert_eq!(v.len(), self.ncols);
        (0..self.nrows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `self^T * v`.
    pub fn rmatvec(&self, v: &[f64]) -> DenseVector {
        assert_eq!(v.len(), self.nrows);
        let mut out = vec![0.0; self.ncols];
        for i in 0..self.nrows {
            let vi = v[i];
            if vi == 0.0 {
                continue;
            }
            for (j, out_j) in out.iter_mut().enumerate() {
                *out_j += self.get(i, j) * vi;
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        DenseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            data,
        }
    }

    /// Keeps the first `k` columns.
    pub fn truncate_cols(&self, k: usize) -> DenseMatrix {
        assert!(k <= self.ncols);
        DenseMatrix::from_fn(self.nrows, k, |i, j| self.get(i, j))
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale(a: &mut [f64], s: f64) {
    for x in a.iter_mut() {
        *x *= s;
    }
}

/// `a -= s * b`
pub fn axpy(a: &mut [f64], s: f64, b: &[f64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x -= s * y;
    }
}

/// In-place modified Gram-Schmidt of the columns of `m`; returns the matrix
/// with orthonormal columns. Columns that become numerically zero are replaced
/// by unit basis vectors orthogonalized against the rest, so the result always
/// has full column rank (requires ncols <= nrows).
pub fn orthonormalize_columns(m: &DenseMatrix) -> DenseMatrix {
    assert!(m.ncols() <= m.nrows());
    let mut cols: Vec<DenseVector> = (0..m.ncols()).map(|j| m.col(j)).collect();
    let n = m.nrows();
    for j in 0..cols.len() {
        for _ in 0..2 {
            for i in 0..j {
                let prev = cols[i].clone();
                let c = dot(&cols[j], &prev);
                axpy(&mut cols[j], c, &prev);
            }
        }
        let nrm = norm2(&cols[j]);
        if nrm > 1e-12 {
            scale(&mut cols[j], 1.0 / nrm);
        } else {
            // fill with a basis vector orthogonal to everything so far
            cols[j] = fill_orthonormal(&cols[..j], n);
        }
    }
    let mut out = DenseMatrix::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_col(j, c);
    }
    out
}

/// Deterministically produces a unit vector orthogonal to the given columns.
pub fn fill_orthonormal(existing: &[DenseVector], n: usize) -> DenseVector {
    for basis in 0..n {
        let mut v = vec![0.0; n];
        v[basis] = 1.0;
        for _ in 0..2 {
            for e in existing {
                let c = dot(&v, e);
                axpy(&mut v, c, e);
            }
        }
        let nrm = norm2(&v);
        if nrm > 1e-6 {
            scale(&mut v, 1.0 / nrm);
            return v;
        }
    }
    panic!("cannot extend orthonormal set: space exhausted");
}
