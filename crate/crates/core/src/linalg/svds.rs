//! Partial SVD of sparse matrices via Golub-Kahan-Lanczos bidiagonalization
//! with full reorthogonalization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::{axpy, dot, norm2, scale, DenseMatrix, DenseVector};
use super::sparse::SparseMatrix;
use super::svd::{svd_dense, SvdResult};
use crate::error::{Error, Result};

const SEED: u64 = 0x5eed_cafe;

/// Top-`k` singular triplets of a sparse matrix.
///
/// `tol` bounds the accepted residual ||A v_i - sigma_i u_i||_2 relative to
/// sigma_1; `max_iter` caps the total number of Lanczos steps. Breakdown
/// (numerical rank below the requested subspace size) pads the result with
/// zero singular values and orthonormal fill vectors.
pub fn svds_sparse(a: &SparseMatrix, k: usize, tol: f64, max_iter: usize) -> Result<SvdResult> {
    let m = a.nrows();
    let n = a.ncols();
    let qmin = m.min(n);
    if k < 1 || k > qmin {
        return Err(Error::InvalidArgument(format!(
            "svds_sparse: k = {k} out of range 1..={qmin}"
        )));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    if a.nnz() == 0 {
        return Ok(padded_zero_result(m, n, k));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut v_cur: DenseVector = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    // project the start vector into the row space: a null-space component
    // would waste a Krylov direction and leave the trailing Ritz values
    // unconverged when the iteration is capped at min(m, n) steps
    let projected = a.rmatvec(&a.matvec(&v_cur));
    if norm2(&projected) > f64::MIN_POSITIVE {
        v_cur = projected;
    }
    let nrm = norm2(&v_cur);
    scale(&mut v_cur, 1.0 / nrm);

    let mut us: Vec<DenseVector> = Vec::new();
    let mut vs: Vec<DenseVector> = vec![v_cur];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let fnorm = a.frobenius_norm();
    let breakdown_tol = fnorm * 1e-13;

    let target = (2 * k + 10).min(qmin).min(max_iter.max(k));
    let mut check_at = target;
    let mut exhausted = false;

    loop {
        while us.len() < check_at {
            let j = us.len();
            // u_j = A v_j - beta_{j-1} u_{j-1}, then full reorth
            let mut u = a.matvec(&vs[j]);
            if j > 0 {
                let b = betas[j - 1];
                axpy(&mut u, b, &us[j - 1].clone());
            }
            reorthogonalize(&mut u, &us);
            let alpha = norm2(&u);
            if alpha <= breakdown_tol {
                exhausted = true;
                break;
            }
            scale(&mut u, 1.0 / alpha);
            alphas.push(alpha);
            us.push(u);

            // beta_j v_{j+1} = A^T u_j - alpha_j v_j
            let mut v = a.rmatvec(&us[j]);
            axpy(&mut v, alphas[j], &vs[j].clone());
            reorthogonalize(&mut v, &vs);
            let beta = norm2(&v);
            if beta <= breakdown_tol {
                exhausted = true;
                betas.push(0.0);
                break;
            }
            scale(&mut v, 1.0 / beta);
            betas.push(beta);
            vs.push(v);
        }

        let p = us.len();
        if p == 0 {
            return Ok(padded_zero_result(m, n, k));
        }

        // SVD of the p x p upper bidiagonal projection
        let mut b = DenseMatrix::zeros(p, p);
        for i in 0..p {
            b.set(i, i, alphas[i]);
            if i + 1 < p {
                b.set(i, i + 1, betas[i]);
            }
        }
        let bsvd = svd_dense(&b)?;
        let s1 = bsvd.sigma[0].max(f64::MIN_POSITIVE);
        let kept = k.min(p);

        // Gap-free convergence bound: beta_p |last component of right vector|
        let beta_last = if exhausted || p == qmin { 0.0 } else { betas[p - 1] };
        let converged = (0..kept).all(|i| beta_last * bsvd.v.get(p - 1, i).abs() <= tol * s1);

        if converged || exhausted || p == qmin || p >= max_iter {
            let result = assemble(a, &us, &vs, &bsvd, kept, k)?;
            let residuals = residuals(a, &result);
            let worst = residuals.iter().cloned().fold(0.0_f64, f64::max);
            if worst > tol * result.sigma[0].max(f64::MIN_POSITIVE) && !(exhausted || p == qmin) {
                if p >= max_iter {
                    return Err(Error::NoConvergence {
                        max_iter,
                        residuals,
                        worst_residual: worst,
                    });
                }
            } else if worst > tol * result.sigma[0].max(f64::MIN_POSITIVE) {
                // subspace exhausted: residual is as good as it gets
                return Ok(result);
            } else {
                return Ok(result);
            }
        }
        if p >= max_iter {
            let result = assemble(a, &us, &vs, &bsvd, kept, k)?;
            let residuals = residuals(a, &result);
            let worst = residuals.iter().cloned().fold(0.0_f64, f64::max);
            return Err(Error::NoConvergence {
                max_iter,
                residuals,
                worst_residual: worst,
            });
        }
        check_at = (p + k.max(10)).min(qmin).min(max_iter);
    }
}

fn reorthogonalize(x: &mut DenseVector, basis: &[DenseVector]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(x, b);
            if c != 0.0 {
                axpy(x, c, b);
            }
        }
    }
}

fn assemble(
    a: &SparseMatrix,
    us: &[DenseVector],
    vs: &[DenseVector],
    bsvd: &SvdResult,
    kept: usize,
    k: usize,
) -> Result<SvdResult> {
    let m = a.nrows();
    let n = a.ncols();
    let p = us.len();
    let mut u = DenseMatrix::zeros(m, k);
    let mut v = DenseMatrix::zeros(n, k);
    let mut sigma = vec![0.0; k];
    let mut u_cols: Vec<DenseVector> = Vec::with_capacity(k);
    let mut v_cols: Vec<DenseVector> = Vec::with_capacity(k);
    for i in 0..kept {
        let mut uc = vec![0.0; m];
        let mut vc = vec![0.0; n];
        for j in 0..p {
            let pu = bsvd.u.get(j, i);
            if pu != 0.0 {
                axpy(&mut uc, -pu, &us[j]);
            }
            let pv = bsvd.v.get(j, i);
            if pv != 0.0 {
                axpy(&mut vc, -pv, &vs[j]);
            }
        }
        sigma[i] = bsvd.sigma[i];
        u_cols.push(uc);
        v_cols.push(vc);
    }
    // pad with orthonormal fill when rank < k
    for _ in kept..k {
        u_cols.push(super::dense::fill_orthonormal(&u_cols, m));
        v_cols.push(super::dense::fill_orthonormal(&v_cols, n));
    }
    for i in 0..k {
        u.set_col(i, &u_cols[i]);
        v.set_col(i, &v_cols[i]);
    }
    let mut res = SvdResult { u, sigma, v };
    res.apply_sign_convention();
    Ok(res)
}

fn residuals(a: &SparseMatrix, svd: &SvdResult) -> Vec<f64> {
    (0..svd.k())
        .map(|i| {
            let av = a.matvec(&svd.v.col(i));
            let u = svd.u.col(i);
            let s = svd.sigma[i];
            av.iter()
                .zip(&u)
                .map(|(x, y)| (x - s * y).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

fn padded_zero_result(m: usize, n: usize, k: usize) -> SvdResult {
    let mut u_cols: Vec<DenseVector> = Vec::new();
    let mut v_cols: Vec<DenseVector> = Vec::new();
    for _ in 0..k {
        u_cols.push(super::dense::fill_orthonormal(&u_cols, m));
        v_cols.push(super::dense::fill_orthonormal(&v_cols, n));
    }
    let mut u = DenseMatrix::zeros(m, k);
    let mut v = DenseMatrix::zeros(n, k);
    for i in 0..k {
        u.set_col(i, &u_cols[i]);
        v.set_col(i, &v_cols[i]);
    }
    SvdResult {
        u,
        sigma: vec![0.0; k],
        v,
    }
}

/// Relative Frobenius distance to the best rank-`k` approximation:
/// sqrt(max(0, ||A||_F^2 - sum_{i<=k} sigma_i^2)) / ||A||_F.
///
/// Uses only the top-k partial SVD; the zero matrix maps to 0 and the
/// radicand is clamped at 0 against cancellation when k is near the rank.
pub fn lowrank_shift_distance(a: &SparseMatrix, k: usize) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidArgument(
            "lowrank_shift_distance: k must be >= 1".into(),
        ));
    }
    let fnorm = a.frobenius_norm();
    if fnorm == 0.0 {
        return Ok(0.0);
    }
    let keff = k.min(a.nrows().min(a.ncols()));
    let svd = svds_sparse(a, keff, 1e-8, a.nrows().min(a.ncols()))?;
    let head: f64 = svd.sigma.iter().map(|s| s * s).sum();
    let tail = (fnorm * fnorm - head).max(0.0);
    Ok(tail.sqrt() / fnorm)
}
