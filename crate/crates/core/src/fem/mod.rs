//! Conforming Bernstein finite elements on triangles with homogeneous
//! Dirichlet conditions: stiffness and load assembly, dense inverse, Galerkin
//! solve and dual-basis diagnostics.

mod assembly;
mod basis;
mod dofmap;
mod dual;
mod solve;
mod sparse;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::LinalgError;
use crate::mesh::Mesh;
use crate::polyops::{bernstein, PiecewisePoly, PolyError, SimplexPoly};

pub use assembly::{assemble_load, assemble_load_with, assemble_stiffness, MAX_FEM_DEGREE};
pub use basis::{ElementBasis, LocalEntity, LOCAL_EDGES};
pub use dofmap::{Carrier, DofInfo, DofMap};
pub use dual::{dual_stability_probe, DualProbe, MAX_PROBE_DEGREE};
pub use solve::{
    fem_solve, l2_error, read_hgrd, solve_dense_inverse, write_hgrd, FemSolution, HGRD_VERSION,
};
pub use sparse::SparseMatrix;

pub use crate::linalg::DenseMatrix;

#[derive(Debug, Error)]
pub enum FemError {
    #[error("polynomial degree {p} outside the supported range 1..={max}")]
    UnsupportedDegree { p: usize, max: usize },
    #[error("{what} is not finite at ({}, {})", .point[0], .point[1])]
    NonFinite { what: &'static str, point: [f64; 2] },
    #[error("a1 is not coercive with alpha1 = {alpha1}: yᵀa1y/|y|² = {ratio} at ({}, {})", .point[0], .point[1])]
    NotCoercive {
        alpha1: f64,
        ratio: f64,
        point: [f64; 2],
    },
    #[error("system has no interior degrees of freedom")]
    EmptySystem,
    #[error("vector of length {got} does not match {expected} degrees of freedom")]
    LengthMismatch { expected: usize, got: usize },
    #[error("Gram matrix of degree {p} is numerically singular")]
    SingularGram { p: usize },
    #[error("output path is empty")]
    EmptyPath,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("bad HGRD file: {0}")]
    BadHeader(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type MatrixField = Arc<dyn Fn([f64; 2]) -> [[f64; 2]; 2] + Send + Sync>;
pub type VectorField = Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>;
pub type ScalarField = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;

/// Coefficients of `a(u, v) = ∫ (a1∇u)·∇v + (a2·∇u) v + a3 u v`.
#[derive(Clone)]
pub struct Coefficients {
    pub a1: MatrixField,
    pub a2: VectorField,
    pub a3: ScalarField,
    pub alpha1: f64,
}

impl std::fmt::Debug for Coefficients {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Coefficients")
            .field("alpha1", &self.alpha1)
            .finish_non_exhaustive()
    }
}

impl Coefficients {
    /// `a1 = I`, `a2 = 0`, `a3 = 0`.
    pub fn laplace() -> Self {
        Self::constant([[1.0, 0.0], [0.0, 1.0]], [0.0, 0.0], 0.0)
    }

    /// Constant coefficients; `alpha1` is the smallest eigenvalue of the
    /// symmetric part of `a1`.
    pub fn constant(a1: [[f64; 2]; 2], a2: [f64; 2], a3: f64) -> Self {
        let (p, q, r) = (a1[0][0], 0.5 * (a1[0][1] + a1[1][0]), a1[1][1]);
        let alpha1 = 0.5 * (p + r) - (0.25 * (p - r) * (p - r) + q * q).sqrt();
        Self {
            a1: Arc::new(move |_| a1),
            a2: Arc::new(move |_| a2),
            a3: Arc::new(move |_| a3),
            alpha1,
        }
    }

    /// Checks `yᵀa1(x)y ≥ alpha1 |y|²` on random `(x, y)` in the unit square.
    pub fn check_coercivity(&self, samples: usize, seed: u64) -> Result<(), FemError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let x = [rng.gen::<f64>(), rng.gen::<f64>()];
            let y = [rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5];
            let a = (self.a1)(x);
            let q =
                y[0] * (a[0][0] * y[0] + a[0][1] * y[1]) + y[1] * (a[1][0] * y[0] + a[1][1] * y[1]);
            let ratio = q / (y[0] * y[0] + y[1] * y[1]);
            if !ratio.is_finite() || ratio < self.alpha1 * (1.0 - 1e-12) {
                return Err(FemError::NotCoercive {
                    alpha1: self.alpha1,
                    ratio,
                    point: x,
                });
            }
        }
        Ok(())
    }
}

/// Element polynomials (in reference coordinates) of the finite element
/// function with global Bernstein coefficients `coeffs`.
pub fn fe_function_pieces(
    mesh: &Mesh,
    dofmap: &DofMap,
    coeffs: &[f64],
) -> Result<PiecewisePoly, FemError> {
    if coeffs.len() != dofmap.num_global() {
        return Err(FemError::LengthMismatch {
            expected: dofmap.num_global(),
            got: coeffs.len(),
        });
    }
    let basis = ElementBasis::new(dofmap.degree());
    let shapes: Vec<SimplexPoly> = (0..basis.len())
        .map(|l| bernstein(2, &basis.gamma(l)))
        .collect();
    let pieces = (0..mesh.num_elements())
        .map(|e| {
            dofmap
                .element_dofs(e)
                .iter()
                .zip(&shapes)
                .fold(SimplexPoly::zero(2, dofmap.degree()), |acc, (&g, s)| {
                    acc.add(&s.scale(coeffs[g]))
                })
        })
        .collect();
    Ok(PiecewisePoly::new(mesh, pieces)?)
}

/// Continuous degree-`p` function vanishing on the boundary, with seeded
/// uniform coefficients in `[-1, 1]` on the interior dofs.
pub fn random_fe_function(mesh: &Mesh, p: usize, seed: u64) -> Result<PiecewisePoly, FemError> {
    let dm = DofMap::new(mesh, p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: Vec<f64> = (0..dm.len()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    fe_function_pieces(mesh, &dm, &dm.extend(&u))
}
