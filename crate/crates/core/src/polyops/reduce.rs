use crate::linalg::{DenseMatrix, LuFactors};
use crate::quadrature::{compositions, SimplexRule};

use super::exact::{exact_bubble_projection, exact_degree_reduce};
use super::lifting::{combined_lift_with, lift_coefficients, BoundaryPoly};
use super::simplex::{barycentric_monomial, bernstein, bernstein_indices, SubSimplex};
use super::{PolyError, SimplexPoly};

/// Highest output degree `p` supported in dimension `d` with the monomial
/// representation. Beyond it the floating-point liftings lose digits in their
/// coefficients and the exact `Ĵ^p` matrix becomes expensive to assemble.
pub fn degree_ceiling(d: usize) -> usize {
    match d {
        0..=2 => 8,
        3 => 7,
        _ => 6,
    }
}

/// `Ĵ^p_d`: maps `f ∈ P_{p+2}(T̂ᵈ)` to `P_p(T̂ᵈ)`.
///
/// Face data are reduced recursively (`g_i = Ĵ^p_{d−1}(f ∘ γ_i)`), lifted with
/// the combined lifting to `G`, and the interior is corrected by the L²
/// projection onto the bubble space: `Ĵ f = G + P̂(f − G)`.
///
/// The whole map is assembled once per `(d, p)` as an exact rational matrix on
/// monomial coefficients and rounded to `f64`, so `Ĵ^p` reproduces `P_p`
/// exactly. [`degree_reduce_recursive`] evaluates the same recursion in
/// floating point.
pub fn degree_reduce(f: &SimplexPoly, p: usize) -> Result<SimplexPoly, PolyError> {
    let actual = f.actual_degree();
    if actual > p + 2 {
        return Err(PolyError::DegreeExceeded {
            actual,
            allowed: p + 2,
        });
    }
    if f.dim() == 0 {
        return f.clone().with_degree(p);
    }
    exact_degree_reduce(f, p)
}

/// `Ĵ^p_d` evaluated step by step in floating point. Agrees with
/// [`degree_reduce`] pointwise; its monomial coefficients lose digits for
/// large `p` through cancellation in the face restrictions and liftings.
pub fn degree_reduce_recursive(f: &SimplexPoly, p: usize) -> Result<SimplexPoly, PolyError> {
    let actual = f.actual_degree();
    if actual > p + 2 {
        return Err(PolyError::DegreeExceeded {
            actual,
            allowed: p + 2,
        });
    }
    let d = f.dim();
    if d == 0 {
        return f.clone().with_degree(p);
    }
    let faces = (0..=d)
        .map(|i| degree_reduce_recursive(&SubSimplex::face(d, i).restrict(f), p))
        .collect::<Result<Vec<_>, _>>()?;
    let g = BoundaryPoly::new_unchecked(d, p, faces)?;
    let big_g = combined_lift_with(&g, &lift_coefficients(d))?;
    let correction = bubble_projection(&f.sub(&big_g), p)?;
    big_g.add(&correction).with_degree(p)
}

/// Basis `λ_0 ⋯ λ_d · λ^γ`, `|γ| = p − d − 1`, of the polynomials in `P_p`
/// vanishing on `∂T̂ᵈ`. Empty when `p ≤ d`.
pub fn bubble_basis(d: usize, p: usize) -> Vec<SimplexPoly> {
    if p < d + 1 {
        return Vec::new();
    }
    let bubble = barycentric_monomial(d, &vec![1; d + 1]);
    compositions(p - d - 1, d + 1)
        .iter()
        .map(|g| {
            bubble
                .mul(&barycentric_monomial(d, g))
                .with_degree(p)
                .expect("degree p")
        })
        .collect()
}

/// L² projection onto the span of `basis`.
fn project(f: &SimplexPoly, basis: &[SimplexPoly], p: usize) -> Result<SimplexPoly, PolyError> {
    let d = f.dim();
    if basis.is_empty() {
        return Ok(SimplexPoly::zero(d, p));
    }
    let rule = SimplexRule::new(d, f.actual_degree().max(p) + p)?;
    let vals: Vec<Vec<f64>> = basis
        .iter()
        .map(|b| rule.points().iter().map(|x| b.eval(x)).collect())
        .collect();
    let fv: Vec<f64> = rule.points().iter().map(|x| f.eval(x)).collect();
    let w = rule.weights();
    let n = basis.len();
    let ip = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .zip(w)
            .map(|((x, y), w)| x * y * w)
            .sum::<f64>()
    };
    let gram = DenseMatrix::from_fn(n, n, |i, j| ip(&vals[i], &vals[j]));
    let rhs: Vec<f64> = vals.iter().map(|v| ip(v, &fv)).collect();
    let c = LuFactors::factor(&gram)?.solve(&rhs)?;
    let mut out = SimplexPoly::zero(d, p);
    for (b, ci) in basis.iter().zip(c) {
        out = out.add(&b.scale(ci));
    }
    out.with_degree(p)
}

/// `P̂`: orthogonal projection onto `P⁰_p(T̂ᵈ)`, applied through an exactly
/// computed rational operator.
pub fn bubble_projection(f: &SimplexPoly, p: usize) -> Result<SimplexPoly, PolyError> {
    if f.dim() == 0 {
        return Ok(SimplexPoly::zero(0, p));
    }
    exact_bubble_projection(f, p)
}

/// Best L² approximation of `f` from `P_p(T̂ᵈ)`, in the Bernstein basis.
pub fn best_approximation(f: &SimplexPoly, p: usize) -> Result<SimplexPoly, PolyError> {
    let d = f.dim();
    let basis: Vec<SimplexPoly> = bernstein_indices(d, p)
        .iter()
        .map(|g| bernstein(d, g))
        .collect();
    project(f, &basis, p)
}
