use crate::mesh::Mesh;

use super::reduce::degree_reduce;
use super::{PolyError, SimplexPoly};

const CONTINUITY_TOL: f64 = 1e-9;
const EDGE_SAMPLES: usize = 20;

/// One polynomial per element, each in that element's reference coordinates
/// `x̂` with `x = F_T(x̂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePoly {
    pieces: Vec<SimplexPoly>,
}

impl PiecewisePoly {
    pub fn new(mesh: &Mesh, pieces: Vec<SimplexPoly>) -> Result<Self, PolyError> {
        if pieces.len() != mesh.num_elements() {
            return Err(PolyError::ElementCount {
                expected: mesh.num_elements(),
                got: pieces.len(),
            });
        }
        if let Some(p) = pieces.iter().find(|p| p.dim() != 2) {
            return Err(PolyError::DimensionMismatch {
                expected: 2,
                got: p.dim(),
            });
        }
        Ok(Self { pieces })
    }

    pub fn pieces(&self) -> &[SimplexPoly] {
        &self.pieces
    }

    pub fn piece(&self, e: usize) -> &SimplexPoly {
        &self.pieces[e]
    }

    /// Value of element `e`'s piece at the physical point `x`.
    pub fn eval(&self, mesh: &Mesh, e: usize, x: [f64; 2]) -> f64 {
        self.pieces[e].eval(&to_reference(mesh, e, x))
    }

    fn scale(&self) -> f64 {
        self.pieces
            .iter()
            .map(SimplexPoly::max_abs_coeff)
            .fold(1.0, f64::max)
    }
}

/// `x̂ = B⁻¹ (x − v0)`
pub(crate) fn to_reference(mesh: &Mesh, e: usize, x: [f64; 2]) -> [f64; 2] {
    let (v0, b) = mesh.element_map(e);
    let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    let (dx, dy) = (x[0] - v0[0], x[1] - v0[1]);
    [
        (b[1][1] * dx - b[0][1] * dy) / det,
        (-b[1][0] * dx + b[0][0] * dy) / det,
    ]
}

fn edge_samples(a: [f64; 2], b: [f64; 2]) -> impl Iterator<Item = [f64; 2]> {
    (0..EDGE_SAMPLES).map(move |i| {
        let t = (i as f64 + 0.5) / EDGE_SAMPLES as f64;
        [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
    })
}

/// Largest jump between the two pieces meeting at an interior edge, over
/// 20 sample points per edge.
pub fn max_interior_jump(mesh: &Mesh, f: &PiecewisePoly) -> f64 {
    let mut worst = 0.0f64;
    for ((a, b), els) in mesh.sorted_edges() {
        if els.len() != 2 {
            continue;
        }
        let (pa, pb) = (mesh.vertices()[a].coords, mesh.vertices()[b].coords);
        for x in edge_samples(pa, pb) {
            worst = worst.max((f.eval(mesh, els[0], x) - f.eval(mesh, els[1], x)).abs());
        }
    }
    worst
}

/// Largest `|f|` sampled on boundary edges.
pub fn max_boundary_value(mesh: &Mesh, f: &PiecewisePoly) -> f64 {
    let mut worst = 0.0f64;
    for ((a, b), els) in mesh.sorted_edges() {
        if els.len() != 1 {
            continue;
        }
        let (pa, pb) = (mesh.vertices()[a].coords, mesh.vertices()[b].coords);
        for x in [pa, pb].into_iter().chain(edge_samples(pa, pb)) {
            worst = worst.max(f.eval(mesh, els[0], x).abs());
        }
    }
    worst
}

/// `J_T^p`: applies `Ĵ^p` on every element. The input must be continuous and
/// vanish on the mesh boundary; both are checked by sampling.
pub fn elementwise_reduce(
    mesh: &Mesh,
    f: &PiecewisePoly,
    p: usize,
) -> Result<PiecewisePoly, PolyError> {
    let scale = f.scale();
    let jump = max_interior_jump(mesh, f);
    if jump > CONTINUITY_TOL * scale {
        return Err(PolyError::Discontinuous { jump });
    }
    let value = max_boundary_value(mesh, f);
    if value > CONTINUITY_TOL * scale {
        return Err(PolyError::NonzeroBoundary { value });
    }
    let pieces = f
        .pieces
        .iter()
        .map(|q| degree_reduce(q, p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PiecewisePoly { pieces })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_patch() -> Mesh {
        let coords = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.3, 0.3]];
        Mesh::new(coords, vec![[0, 1, 3], [1, 2, 3], [2, 0, 3]]).unwrap()
    }

    /// Pulls a global polynomial back to every element.
    fn pull_back(mesh: &Mesh, g: &SimplexPoly) -> PiecewisePoly {
        let pieces = (0..mesh.num_elements())
            .map(|e| {
                let (v0, b) = mesh.element_map(e);
                g.compose_affine(&[b[0].to_vec(), b[1].to_vec()], &v0)
            })
            .collect();
        PiecewisePoly::new(mesh, pieces).unwrap()
    }

    #[test]
    fn reference_map_roundtrip() {
        let m = three_patch();
        let x = to_reference(&m, 1, [0.3, 0.3]);
        assert!((x[0] - 0.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonzero_boundary() {
        let m = three_patch();
        let f = pull_back(&m, &SimplexPoly::constant(2, 1.0));
        assert!(matches!(
            elementwise_reduce(&m, &f, 1),
            Err(PolyError::NonzeroBoundary { .. })
        ));
    }

    #[test]
    fn rejects_discontinuous_input() {
        let m = three_patch();
        let mut f = pull_back(&m, &SimplexPoly::zero(2, 2));
        f.pieces[0] = crate::polyops::simplex::barycentric_monomial(2, &[1, 1, 1]).scale(5.0);
        // a bubble on element 0 is harmless; element 1 is nonzero at the interior vertex
        f.pieces[1] = SimplexPoly::coordinate(2, 1).scale(0.5);
        assert!(matches!(
            elementwise_reduce(&m, &f, 1),
            Err(PolyError::Discontinuous { .. })
        ));
    }
}
