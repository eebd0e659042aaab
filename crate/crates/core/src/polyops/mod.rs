//! Polynomials on the reference simplex `T̂ᵈ = {x ∈ [0,1]ᵈ : Σ xᵢ ≤ 1}` in any
//! dimension: face liftings, the combined boundary lifting and the
//! degree-reducing projection `Ĵ^p`, plus its elementwise version on meshes.

mod elementwise;
mod exact;
mod lifting;
mod poly;
mod reduce;
mod simplex;

pub use elementwise::{elementwise_reduce, max_boundary_value, max_interior_jump, PiecewisePoly};
pub use lifting::{
    combined_lift, combined_lift_with, expanded_coefficients, lift_coefficients, lift_face,
    lift_sum, node_value, restrict_lift_sum, subsimplices_of_face, telescoping_product,
    BoundaryPoly, COMPAT_TOL,
};
pub use poly::{MultiIndex, SimplexPoly};
pub use reduce::{
    best_approximation, bubble_basis, bubble_projection, degree_ceiling, degree_reduce,
    degree_reduce_recursive,
};
pub use simplex::{
    barycentric, barycentric_monomial, barycentric_poly, bernstein, bernstein_indices,
    inner_product, poly_quadrature_norm, reference_node, subsimplices, Region, SubSimplex,
};

use thiserror::Error;

use crate::linalg::LinalgError;
use crate::quadrature::QuadratureError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("dimension mismatch: expected {expected} variables, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("polynomial degree {actual} exceeds the allowed {allowed}")]
    DegreeExceeded { actual: usize, allowed: usize },
    #[error("non-finite coefficient")]
    NonFinite,
    #[error("nodes {nodes:?} do not form a subsimplex of the reference {d}-simplex")]
    InvalidSubsimplex { d: usize, nodes: Vec<usize> },
    #[error("expected {expected} face polynomials, got {got}")]
    FaceCount { expected: usize, got: usize },
    #[error("face traces disagree on a shared subsimplex (residual {residual:e})")]
    IncompatibleTraces { residual: f64 },
    #[error("piecewise polynomial jumps by {jump:e} across an interior edge")]
    Discontinuous { jump: f64 },
    #[error("piecewise polynomial does not vanish on the boundary (max {value:e})")]
    NonzeroBoundary { value: f64 },
    #[error("element count mismatch: mesh has {expected}, got {got}")]
    ElementCount { expected: usize, got: usize },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
