//! Matrix types, dense and partial sparse SVD, and spectral utilities.

pub mod dense;
pub mod sparse;
pub mod svd;
pub mod svds;

pub use dense::{orthonormalize_columns, DenseMatrix, DenseVector};
pub use sparse::SparseMatrix;
pub use svd::{best_k, best_k_times, cosine, svd_dense, SvdResult, DEFAULT_RANK_TOL};
pub use svds::{lowrank_shift_distance, svds_sparse};

/// CSV rendering of a singular-value list: header "index,sigma", 1-based index.
pub fn sigma_csv(sigma: &[f64]) -> String {
    let mut out = String::from("index,sigma\n");
    for (i, s) in sigma.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, s));
    }
    out
}
