use crate::linalg::{DenseMatrix, LuFactors};
use crate::polyops::{bernstein, bernstein_indices, inner_product};

use super::FemError;

pub const MAX_PROBE_DEGREE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualProbe {
    pub p: usize,
    pub d: usize,
    /// `max_j ‖λ̂_j‖_{L²(T̂)}`
    pub max_norm: f64,
    /// `max |⟨φ̂_i, λ̂_j⟩ − δ_ij|`
    pub duality_residual: f64,
}

/// Dual functions `λ̂_j = Σ_k (G⁻¹)_{jk} φ̂_k` of the degree-`p` Bernstein basis
/// on the reference simplex, where `G` is the L² Gram matrix. Then
/// `‖λ̂_j‖² = (G⁻¹)_{jj}` and `⟨φ̂_i, λ̂_j⟩ = (G G⁻¹)_{ij}`.
pub fn dual_stability_probe(p: usize, d: usize) -> Result<DualProbe, FemError> {
    if p > MAX_PROBE_DEGREE {
        return Err(FemError::UnsupportedDegree {
            p,
            max: MAX_PROBE_DEGREE,
        });
    }
    let basis: Vec<_> = bernstein_indices(d, p)
        .iter()
        .map(|g| bernstein(d, g))
        .collect();
    let n = basis.len();
    let mut gram = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = inner_product(&basis[i], &basis[j])?;
            gram.row_mut(i)[j] = v;
            gram.row_mut(j)[i] = v;
        }
    }
    let inv = LuFactors::factor(&gram)
        .and_then(|lu| lu.inverse())
        .map_err(|_| FemError::SingularGram { p })?;
    let max_norm = (0..n).map(|j| inv.row(j)[j]).fold(0.0f64, f64::max).sqrt();
    let prod = gram.matmul(&inv)?;
    let mut duality_residual = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            duality_residual = duality_residual.max((prod.row(i)[j] - delta).abs());
        }
    }
    Ok(DualProbe {
        p,
        d,
        max_norm,
        duality_residual,
    })
}
