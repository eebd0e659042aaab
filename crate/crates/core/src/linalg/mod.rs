//! Dense linear algebra kernels: row-major matrices, LU with partial pivoting,
//! one-sided Jacobi SVD and power iteration for the spectral norm.

mod dense;
mod lu;
mod power;
mod svd;

pub use dense::DenseMatrix;
pub use lu::{LuFactors, MAX_DENSE_INVERSE_DIM};
pub use power::{spectral_norm, SpectralEstimate};
pub use svd::{jacobi_svd, low_rank_svd, truncated_svd, LowRankFactor, Svd};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },
    #[error("matrix is singular at pivot {pivot}")]
    SingularPivot { pivot: usize },
    #[error("dense matrix of order {n} exceeds the dense-inverse guard of {max}")]
    TooLarge { n: usize, max: usize },
    #[error("Jacobi SVD did not converge after {sweeps} sweeps")]
    SvdNoConvergence { sweeps: usize },
    #[error("non-finite entry encountered")]
    NonFinite,
}

/// Dot product with four independent accumulators.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

/// `y += alpha * x`
#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
