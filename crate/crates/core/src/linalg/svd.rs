//! Full dense SVD via one-sided Jacobi, plus truncated reconstruction.

use serde::{Deserialize, Serialize};

use super::dense::{axpy, dot, fill_orthonormal, norm2, scale, DenseMatrix, DenseVector};
use crate::error::{Error, Result};

pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Singular triplets (U, sigma, V) with orthonormal factor columns and
/// nonincreasing sigma.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvdResult {
    pub u: DenseMatrix,
    pub sigma: DenseVector,
    pub v: DenseMatrix,
}

impl SvdResult {
    pub fn k(&self) -> usize {
        self.sigma.len()
    }

    /// Largest i such that sigma_i is above the numerical-rank threshold.
    pub fn numerical_rank(&self, rank_tol: f64) -> usize {
        if self.sigma.is_empty() {
            return 0;
        }
        let s1 = self.sigma[0];
        let eps = f64::EPSILON;
        let dim = self.u.nrows().max(self.v.nrows()) as f64;
        let thresh = s1 * (dim * eps).max(rank_tol);
        self.sigma.iter().filter(|&&s| s > thresh).count()
    }

    /// Fixes the sign of each triplet: the largest-magnitude entry of u_i is
    /// made positive (ties broken by lower index).
    pub fn apply_sign_convention(&mut self) {
        for i in 0..self.k() {
            let mut best = 0usize;
            let mut best_abs = f64::NEG_INFINITY;
            for r in 0..self.u.nrows() {
                let a = self.u.get(r, i).abs();
                if a > best_abs {
                    best_abs = a;
                    best = r;
                }
            }
            if self.u.get(best, i) < 0.0 {
                for r in 0..self.u.nrows() {
                    let x = self.u.get(r, i);
                    self.u.set(r, i, -x);
                }
                for r in 0..self.v.nrows() {
                    let x = self.v.get(r, i);
                    self.v.set(r, i, -x);
                }
            }
        }
    }
}

/// Full SVD of a dense matrix, one-sided Jacobi on the columns.
///
/// Returns min(m, n) triplets sorted by nonincreasing sigma; factor columns
/// are orthonormal even when the input is rank deficient.
pub fn svd_dense(m: &DenseMatrix) -> Result<SvdResult> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    if m.nrows() < m.ncols() {
        let t = svd_dense(&m.transpose())?;
        let mut res = SvdResult {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        };
        res.apply_sign_convention();
        return Ok(res);
    }

    let nrows = m.nrows();
    let ncols = m.ncols();
    let mut cols: Vec<DenseVector> = (0..ncols).map(|j| m.col(j)).collect();
    let mut v: Vec<DenseVector> = (0..ncols)
        .map(|j| {
            let mut e = vec![0.0; ncols];
            e[j] = 1.0;
            e
        })
        .collect();

    let tol = 1e-14;
    let max_sweeps = 60;
    for _sweep in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..ncols.saturating_sub(1) {
            for q in p + 1..ncols {
                let (alpha, beta, gamma) = {
                    let cp = &cols[p];
                    let cq = &cols[q];
                    (dot(cp, cp), dot(cq, cq), dot(cp, cq))
                };
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut cols, p, q, c, s);
                rotate_pair(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..ncols).collect();
    let norms: Vec<f64> = cols.iter().map(|c| norm2(c)).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap().then(a.cmp(&b)));

    let fnorm = m.frobenius_norm();
    let zero_thresh = fnorm * 1e-14;
    let mut u = DenseMatrix::zeros(nrows, ncols);
    let mut sigma = Vec::with_capacity(ncols);
    let mut vmat = DenseMatrix::zeros(ncols, ncols);
    let mut u_cols: Vec<DenseVector> = Vec::with_capacity(ncols);
    for (slot, &j) in order.iter().enumerate() {
        let s = norms[j];
        let ucol = if s > zero_thresh && s > 0.0 {
            let mut c = cols[j].clone();
            scale(&mut c, 1.0 / s);
            sigma.push(s);
            c
        } else {
            sigma.push(0.0);
            fill_orthonormal(&u_cols, nrows)
        };
        u.set_col(slot, &ucol);
        u_cols.push(ucol);
        vmat.set_col(slot, &v[j]);
    }

    let mut res = SvdResult { u, sigma, v: vmat };
    res.apply_sign_convention();
    Ok(res)
}

fn rotate_pair(cols: &mut [DenseVector], p: usize, q: usize, c: f64, s: f64) {
    let n = cols[p].len();
    for i in 0..n {
        let xp = cols[p][i];
        let xq = cols[q][i];
        cols[p][i] = c * xp - s * xq;
        cols[q][i] = s * xp + c * xq;
    }
}

/// Truncated reconstruction: sum of the first `k` dyads sigma_i u_i v_i^T.
pub fn best_k(svd: &SvdResult, k: usize) -> Result<DenseMatrix> {
    if k < 1 || k > svd.k() {
        return Err(Error::InvalidArgument(format!(
            "best_k: k = {} out of range 1..={}",
            k,
            svd.k()
        )));
    }
    let m = svd.u.nrows();
    let n = svd.v.nrows();
    let mut out = DenseMatrix::zeros(m, n);
    for i in 0..k {
        let s = svd.sigma[i];
        for r in 0..m {
            let ur = svd.u.get(r, i) * s;
            if ur == 0.0 {
                continue;
            }
            for c in 0..n {
                let val = out.get(r, c) + ur * svd.v.get(c, i);
                out.set(r, c, val);
            }
        }
    }
    Ok(out)
}

/// Row sums of `best_k` weighted by `p`: sum_i sigma_i (v_i . p) u_i.
/// Avoids forming the truncated matrix.
pub fn best_k_times(svd: &SvdResult, k: usize, p: &[f64]) -> Result<DenseVector> {
    if k < 1 || k > svd.k() {
        return Err(Error::InvalidArgument(format!(
            "best_k_times: k = {} out of range 1..={}",
            k,
            svd.k()
        )));
    }
    let m = svd.u.nrows();
    let mut out = vec![0.0; m];
    for i in 0..k {
        let w = svd.sigma[i] * dot(&svd.v.col(i), p);
        if w == 0.0 {
            continue;
        }
        let neg = -w;
        axpy(&mut out, neg, &svd.u.col(i));
    }
    Ok(out)
}

/// Cosine of the angle between two vectors; 0 when either has zero norm.
pub fn cosine(u: &[f64], v: &[f64]) -> f64 {
    let nu = norm2(u);
    let nv = norm2(v);
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    dot(u, v) / (nu * nv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_factors(m: &DenseMatrix, svd: &SvdResult) {
        let k = svd.k();
        assert_eq!(k, m.nrows().min(m.ncols()));
        // orthonormality
        let utu = svd.u.transpose().matmul(&svd.u);
        let vtv = svd.v.transpose().matmul(&svd.v);
        for i in 0..k {
            for j in 0..k {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((utu.get(i, j) - want).abs() <= 1e-8, "UtU off at {i},{j}");
                assert!((vtv.get(i, j) - want).abs() <= 1e-8, "VtV off at {i},{j}");
            }
        }
        // ordering
        for i in 1..k {
            assert!(svd.sigma[i - 1] >= svd.sigma[i] - 1e-12);
            assert!(svd.sigma[i] >= 0.0);
        }
        // reconstruction
        let rec = best_k(svd, k).unwrap();
        let err = m.sub(&rec).frobenius_norm();
        assert!(err <= 1e-10 * (1.0 + m.frobenius_norm()), "recon err {err}");
    }

    #[test]
    fn identity_has_unit_singular_values() {
        let m = DenseMatrix::identity(3);
        let svd = svd_dense(&m).unwrap();
        for s in &svd.sigma {
            assert!((s - 1.0).abs() < 1e-12);
        }
        check_factors(&m, &svd);
    }

    #[test]
    fn padded_diag() {
        // diag(3,2) padded to 3x2
        let mut m = DenseMatrix::zeros(3, 2);
        m.set(0, 0, 3.0);
        m.set(1, 1, 2.0);
        let svd = svd_dense(&m).unwrap();
        assert!((svd.sigma[0] - 3.0).abs() < 1e-12);
        assert!((svd.sigma[1] - 2.0).abs() < 1e-12);
        check_factors(&m, &svd);
    }

    #[test]
    fn wide_matrix_transposed_path() {
        let m = DenseMatrix::from_fn(2, 5, |i, j| ((i + 1) * (j + 1)) as f64 + (j as f64).sin());
        let svd = svd_dense(&m).unwrap();
        check_factors(&m, &svd);
    }

    #[test]
    fn rank_deficient_input_keeps_orthonormal_factors() {
        // rank 1: all columns proportional
        let m = DenseMatrix::from_fn(4, 3, |i, j| ((i + 1) as f64) * ((j + 1) as f64));
        let svd = svd_dense(&m).unwrap();
        check_factors(&m, &svd);
        assert_eq!(svd.numerical_rank(DEFAULT_RANK_TOL), 1);
        assert!(svd.sigma[1].abs() < 1e-10 * svd.sigma[0]);
    }

    #[test]
    fn best_k_one_on_diag() {
        let mut m = DenseMatrix::zeros(2, 2);
        m.set(0, 0, 3.0);
        m.set(1, 1, 2.0);
        let svd = svd_dense(&m).unwrap();
        let b = best_k(&svd, 1).unwrap();
        assert!((b.get(0, 0) - 3.0).abs() < 1e-12);
        assert!(b.get(1, 1).abs() < 1e-12);
    }

    #[test]
    fn best_k_out_of_range_rejected() {
        let m = DenseMatrix::identity(2);
        let svd = svd_dense(&m).unwrap();
        assert!(best_k(&svd, 0).is_err());
        assert!(best_k(&svd, 3).is_err());
    }

    #[test]
    fn best_k_times_matches_materialized() {
        let m = DenseMatrix::from_fn(5, 3, |i, j| ((i * 3 + j) as f64).cos());
        let svd = svd_dense(&m).unwrap();
        let p = vec![1.0, 2.0, -0.5];
        let fast = best_k_times(&svd, 2, &p).unwrap();
        let slow = best_k(&svd, 2).unwrap().matvec(&p);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn non_finite_rejected() {
        let mut m = DenseMatrix::zeros(2, 2);
        m.set(0, 0, f64::NAN);
        assert!(matches!(svd_dense(&m), Err(Error::NonFinite)));
    }

    #[test]
    fn cosine_basics() {
        assert!((cosine(&[1.0, 0.0], &[1.0, 0.0]) - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
        assert_eq!(cosine(&[0.0, 0.0], &[3.0, 4.0]), 0.0);
    }

    #[test]
    fn sign_convention_is_deterministic() {
        let m = DenseMatrix::from_fn(4, 4, |i, j| ((i * 7 + j * 3) as f64).sin());
        let a = svd_dense(&m).unwrap();
        let b = svd_dense(&m.clone()).unwrap();
        for i in 0..a.k() {
            for r in 0..4 {
                assert_eq!(a.u.get(r, i), b.u.get(r, i));
            }
        }
    }
}
