//! Column-compressed sparse matrices.

use serde::{Deserialize, Serialize};

use super::dense::{DenseMatrix, DenseVector};

/// CSC matrix. Row indices are sorted and unique within each column and no
/// explicit zeros are stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix {
            nrows,
            ncols,
            col_ptr: vec![0; ncols + 1],
            row_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds from per-column (row, value) lists. Entries within a column may
    /// be in any order; duplicates are summed and zeros dropped.
    pub fn from_columns(nrows: usize, columns: Vec<Vec<(usize, f64)>>) -> Self {
        let ncols = columns.len();
        let mut col_ptr = Vec::with_capacity(ncols + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for mut col in columns {
            col.sort_by_key(|&(r, _)| r);
            let mut iter = col.into_iter().peekable();
            while let Some((r, mut v)) = iter.next() {
                assert!(r < nrows, "row index out of bounds");
                while let Some(&(r2, v2)) = iter.peek() {
                    if r2 == r {
                        v += v2;
                        iter.next();
                    } else {
                        break;
                    }
                }
                if v != 0.0 {
                    row_idx.push(r);
                    values.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        SparseMatrix {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn from_dense(m: &DenseMatrix, drop_tol: f64) -> Self {
        let cols = (0..m.ncols())
            .map(|j| {
                (0..m.nrows())
                    .filter_map(|i| {
                        let v = m.get(i, j);
                        (v.abs() > drop_tol).then_some((i, v))
                    })
                    .collect()
            })
            .collect();
        SparseMatrix::from_columns(m.nrows(), cols)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// (row, value) entries of column `j`.
    pub fn col(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.col_ptr[j];
        let hi = self.col_ptr[j + 1];
        self.row_idx[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    pub fn col_nnz(&self, j: usize) -> usize {
        self.col_ptr[j + 1] - self.col_ptr[j]
    }

    pub fn col_norm(&self, j: usize) -> f64 {
        self.col(j).map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// y = A x
    pub fn matvec(&self, x: &[f64]) -> DenseVector {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![0.0; self.nrows];
        for j in 0..self.ncols {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            for (r, v) in self.col(j) {
                y[r] += v * xj;
            }
        }
        y
    }

    /// y = A^T x
    pub fn rmatvec(&self, x: &[f64]) -> DenseVector {
        assert_eq!(x.len(), self.nrows);
        (0..self.ncols)
            .map(|j| self.col(j).map(|(r, v)| v * x[r]).sum())
            .collect()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.nrows, self.ncols);
        for j in 0..self.ncols {
            for (r, v) in self.col(j) {
                m.set(r, j, v);
            }
        }
        m
    }

    /// Sorted row indices that carry at least one nonzero.
    pub fn row_support(&self) -> Vec<usize> {
        let mut present = vec![false; self.nrows];
        for &r in &self.row_idx {
            present[r] = true;
        }
        present
            .iter()
            .enumerate()
            .filter_map(|(i, &p)| p.then_some(i))
            .collect()
    }
}
