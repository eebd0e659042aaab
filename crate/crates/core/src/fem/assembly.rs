use crate::mesh::Mesh;
use crate::quadrature::SimplexRule;

use super::basis::ElementBasis;
use super::{Coefficients, DofMap, FemError, SparseMatrix};

pub const MAX_FEM_DEGREE: usize = 4;

/// Basis values and reference gradients tabulated at the points of a rule.
pub(crate) struct Tabulation {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub grads: Vec<Vec<[f64; 2]>>,
}

impl Tabulation {
    pub fn new(basis: &ElementBasis, degree: usize) -> Result<Self, FemError> {
        let rule = SimplexRule::new(2, degree).map_err(crate::polyops::PolyError::from)?;
        let points: Vec<[f64; 2]> = rule.points().iter().map(|x| [x[0], x[1]]).collect();
        let (values, grads) = points.iter().map(|&x| basis.eval(x)).unzip();
        Ok(Self {
            points,
            weights: rule.weights().to_vec(),
            values,
            grads,
        })
    }
}

pub(crate) fn check_degree(p: usize) -> Result<(), FemError> {
    if (1..=MAX_FEM_DEGREE).contains(&p) {
        Ok(())
    } else {
        Err(FemError::UnsupportedDegree {
            p,
            max: MAX_FEM_DEGREE,
        })
    }
}

/// `x = v0 + B x̂`
pub(crate) fn map_point(v0: [f64; 2], b: &[[f64; 2]; 2], xh: [f64; 2]) -> [f64; 2] {
    [
        v0[0] + b[0][0] * xh[0] + b[0][1] * xh[1],
        v0[1] + b[1][0] * xh[0] + b[1][1] * xh[1],
    ]
}

fn finite(what: &'static str, point: [f64; 2], vals: &[f64]) -> Result<(), FemError> {
    if vals.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(FemError::NonFinite { what, point })
    }
}

/// Stiffness matrix `A[m][n] = a(φ_n, φ_m)` over the interior dofs.
pub fn assemble_stiffness(
    mesh: &Mesh,
    coeffs: &Coefficients,
    p: usize,
) -> Result<(SparseMatrix, DofMap), FemError> {
    check_degree(p)?;
    let dm = DofMap::new(mesh, p);
    let basis = ElementBasis::new(p);
    let tab = Tabulation::new(&basis, 2 * p + 2)?;
    let nl = basis.len();

    let mut rows = vec![Vec::new(); dm.len()];
    for e in 0..mesh.num_elements() {
        let ids: Vec<usize> = dm
            .element_dofs(e)
            .iter()
            .filter_map(|&g| dm.interior_index(g))
            .collect();
        for &m in &ids {
            rows[m].extend_from_slice(&ids);
        }
    }
    let mut a = SparseMatrix::with_pattern(rows);

    let mut k = vec![0.0; nl * nl];
    let mut phys = vec![[0.0; 2]; nl];
    for e in 0..mesh.num_elements() {
        let (v0, b) = mesh.element_map(e);
        let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
        k.iter_mut().for_each(|x| *x = 0.0);
        for q in 0..tab.points.len() {
            let x = map_point(v0, &b, tab.points[q]);
            let a1 = (coeffs.a1)(x);
            let a2 = (coeffs.a2)(x);
            let a3 = (coeffs.a3)(x);
            finite("a1", x, &[a1[0][0], a1[0][1], a1[1][0], a1[1][1]])?;
            finite("a2", x, &a2)?;
            finite("a3", x, &[a3])?;
            let w = tab.weights[q] * det.abs();
            // ∇φ = B⁻ᵀ ∇̂φ̂
            for (g, gh) in phys.iter_mut().zip(&tab.grads[q]) {
                *g = [
                    (b[1][1] * gh[0] - b[1][0] * gh[1]) / det,
                    (-b[0][1] * gh[0] + b[0][0] * gh[1]) / det,
                ];
            }
            let vals = &tab.values[q];
            for j in 0..nl {
                let gj = phys[j];
                let flux = [
                    a1[0][0] * gj[0] + a1[0][1] * gj[1],
                    a1[1][0] * gj[0] + a1[1][1] * gj[1],
                ];
                let conv = a2[0] * gj[0] + a2[1] * gj[1];
                for i in 0..nl {
                    let gi = phys[i];
                    k[i * nl + j] +=
                        w * (flux[0] * gi[0] + flux[1] * gi[1] + (conv + a3 * vals[j]) * vals[i]);
                }
            }
        }
        let dofs = dm.element_dofs(e);
        for i in 0..nl {
            let Some(m) = dm.interior_index(dofs[i]) else {
                continue;
            };
            for j in 0..nl {
                if let Some(n) = dm.interior_index(dofs[j]) {
                    *a.entry_mut(m, n).expect("pattern covers element pairs") += k[i * nl + j];
                }
            }
        }
    }
    a.drop_symmetric_zeros();
    Ok((a, dm))
}

/// Load vector `(f, φ_m)` over the interior dofs.
pub fn assemble_load(
    mesh: &Mesh,
    f: &dyn Fn([f64; 2]) -> f64,
    p: usize,
) -> Result<Vec<f64>, FemError> {
    check_degree(p)?;
    assemble_load_with(mesh, &DofMap::new(mesh, p), f)
}

pub fn assemble_load_with(
    mesh: &Mesh,
    dm: &DofMap,
    f: &dyn Fn([f64; 2]) -> f64,
) -> Result<Vec<f64>, FemError> {
    let p = dm.degree();
    check_degree(p)?;
    let basis = ElementBasis::new(p);
    let tab = Tabulation::new(&basis, 2 * p + 2)?;
    let mut rhs = vec![0.0; dm.len()];
    for e in 0..mesh.num_elements() {
        let (v0, b) = mesh.element_map(e);
        let det = (b[0][0] * b[1][1] - b[0][1] * b[1][0]).abs();
        let dofs = dm.element_dofs(e);
        for q in 0..tab.points.len() {
            let x = map_point(v0, &b, tab.points[q]);
            let fx = f(x);
            finite("f", x, &[fx])?;
            let w = tab.weights[q] * det * fx;
            for (l, &g) in dofs.iter().enumerate() {
                if let Some(m) = dm.interior_index(g) {
                    rhs[m] += w * tab.values[q][l];
                }
            }
        }
    }
    Ok(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_graded_mesh, GradingSpec};

    #[test]
    fn degree_out_of_range() {
        let m = make_graded_mesh(&GradingSpec::uniform(0.5)).unwrap();
        assert!(matches!(
            assemble_stiffness(&m, &Coefficients::laplace(), 5),
            Err(FemError::UnsupportedDegree { p: 5, .. })
        ));
        assert!(matches!(
            assemble_load(&m, &|_| 1.0, 0),
            Err(FemError::UnsupportedDegree { .. })
        ));
    }

    #[test]
    fn non_finite_coefficient_rejected() {
        let m = make_graded_mesh(&GradingSpec::uniform(0.5)).unwrap();
        let mut c = Coefficients::laplace();
        c.a3 = std::sync::Arc::new(|x| if x[0] > 0.5 { f64::NAN } else { 0.0 });
        assert!(matches!(
            assemble_stiffness(&m, &c, 1),
            Err(FemError::NonFinite { what: "a3", .. })
        ));
    }

    #[test]
    fn constants_are_in_the_kernel_of_the_full_laplacian_rows() {
        // for a row whose patch avoids the boundary, Σ_n A[m][n] over all global
        // dofs is a(1, φ_m) = 0; interior-only rows of a 4×4 grid centre vertex
        let m = make_graded_mesh(&GradingSpec::uniform(0.25)).unwrap();
        let (a, dm) = assemble_stiffness(&m, &Coefficients::laplace(), 2).unwrap();
        let centre = m
            .vertices()
            .iter()
            .position(|v| v.coords == [0.5, 0.5])
            .unwrap();
        let row = dm.interior_index(centre).unwrap();
        let s: f64 = a.row(row).map(|(_, v)| v).sum();
        assert!(s.abs() < 1e-13, "{s}");
    }
}
