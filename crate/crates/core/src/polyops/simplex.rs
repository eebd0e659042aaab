use crate::linalg::{DenseMatrix, LuFactors};
use crate::quadrature::{compositions, factorial, SimplexRule};

use super::{PolyError, SimplexPoly};

/// Node `i` of the reference simplex `T̂ᵈ`: the origin for `i = 0`, else `e_i`.
pub fn reference_node(d: usize, i: usize) -> Vec<f64> {
    let mut x = vec![0.0; d];
    if i > 0 {
        x[i - 1] = 1.0;
    }
    x
}

/// Barycentric coordinates `(λ_0, …, λ_d)` of `x`: `λ_0 = 1 − Σ x_j`, `λ_i = x_i`.
pub fn barycentric(x: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len() + 1);
    out.push(1.0 - x.iter().sum::<f64>());
    out.extend_from_slice(x);
    out
}

/// `λ_i` as a polynomial in `d` variables.
pub fn barycentric_poly(d: usize, i: usize) -> SimplexPoly {
    if i == 0 {
        SimplexPoly::affine(1.0, &vec![-1.0; d])
    } else {
        SimplexPoly::coordinate(d, i - 1)
    }
}

/// `λ^γ = Π λ_i^{γ_i}` over the `d + 1` barycentric coordinates.
pub fn barycentric_monomial(d: usize, gamma: &[usize]) -> SimplexPoly {
    assert_eq!(gamma.len(), d + 1);
    let mut out = SimplexPoly::constant(d, 1.0);
    for (i, &g) in gamma.iter().enumerate() {
        if g > 0 {
            out = out.mul(&barycentric_poly(d, i).pow(g));
        }
    }
    out
}

/// Bernstein polynomial `B_γ = |γ|!/γ! · λ^γ`.
pub fn bernstein(d: usize, gamma: &[usize]) -> SimplexPoly {
    let p: usize = gamma.iter().sum();
    let c = factorial(p) / gamma.iter().map(|&g| factorial(g)).product::<f64>();
    barycentric_monomial(d, gamma)
        .scale(c)
        .with_degree(p)
        .expect("degree is exact")
}

/// All multi-indices `γ ∈ ℕ^{d+1}` with `|γ| = p`.
pub fn bernstein_indices(d: usize, p: usize) -> Vec<Vec<usize>> {
    compositions(p, d + 1)
}

/// A `k`-subsimplex of `T̂ᵈ`, the convex hull of `k + 1` reference nodes held
/// in ascending order. Its parametrization over `T̂ᵏ` is
/// `σ(t) = N_{a_0} + Σ_j t_j (N_{a_j} − N_{a_0})`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubSimplex {
    d: usize,
    nodes: Vec<usize>,
}

impl SubSimplex {
    pub fn new(d: usize, mut nodes: Vec<usize>) -> Result<Self, PolyError> {
        nodes.sort_unstable();
        nodes.dedup();
        if nodes.is_empty() || nodes.len() > d + 1 || nodes.iter().any(|&n| n > d) {
            return Err(PolyError::InvalidSubsimplex { d, nodes });
        }
        Ok(Self { d, nodes })
    }

    /// The `(d−1)`-face opposite node `i`.
    pub fn face(d: usize, i: usize) -> Self {
        Self {
            d,
            nodes: (0..=d).filter(|&n| n != i).collect(),
        }
    }

    pub fn whole(d: usize) -> Self {
        Self {
            d,
            nodes: (0..=d).collect(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.d
    }

    /// Simplex dimension `k`.
    pub fn dim(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn contains_node(&self, n: usize) -> bool {
        self.nodes.binary_search(&n).is_ok()
    }

    pub fn is_subset_of(&self, other: &SubSimplex) -> bool {
        self.nodes.iter().all(|&n| other.contains_node(n))
    }

    /// Rows `A` (d × k) and offset `b` of `σ(t) = A t + b`.
    pub fn affine_map(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let b = reference_node(self.d, self.nodes[0]);
        let cols: Vec<Vec<f64>> = self.nodes[1..]
            .iter()
            .map(|&n| {
                reference_node(self.d, n)
                    .iter()
                    .zip(&b)
                    .map(|(x, y)| x - y)
                    .collect()
            })
            .collect();
        let a = (0..self.d)
            .map(|r| cols.iter().map(|c| c[r]).collect())
            .collect();
        (a, b)
    }

    pub fn point(&self, t: &[f64]) -> Vec<f64> {
        let (a, b) = self.affine_map();
        a.iter()
            .zip(&b)
            .map(|(row, bi)| bi + row.iter().zip(t).map(|(x, y)| x * y).sum::<f64>())
            .collect()
    }

    /// Parameter `t` of a point `x` lying on the subsimplex: the barycentric
    /// weights of nodes `a_1, …, a_k`.
    pub fn param_of(&self, x: &[f64]) -> Vec<f64> {
        let lam = barycentric(x);
        self.nodes[1..].iter().map(|&n| lam[n]).collect()
    }

    /// `f ∘ σ`, a polynomial on `T̂ᵏ`.
    pub fn restrict(&self, f: &SimplexPoly) -> SimplexPoly {
        assert_eq!(f.dim(), self.d);
        let (a, b) = self.affine_map();
        if self.dim() == 0 {
            return SimplexPoly::constant(0, f.eval(&b))
                .with_degree(f.degree())
                .expect("constant");
        }
        f.compose_affine(&a, &b)
    }

    /// `√det(Gram of the edge vectors)`, the `k`-volume scaling of `σ`.
    pub fn gram_factor(&self) -> f64 {
        let k = self.dim();
        if k == 0 {
            return 1.0;
        }
        let (a, _) = self.affine_map();
        let g = DenseMatrix::from_fn(k, k, |i, j| (0..self.d).map(|r| a[r][i] * a[r][j]).sum());
        determinant(&g).abs().sqrt()
    }

    /// Evenly spread interior sample points (Cartesian, in `T̂ᵈ`).
    pub fn sample_points(&self, per_edge: usize) -> Vec<Vec<f64>> {
        let k = self.dim();
        let n = per_edge.max(1) + 1;
        compositions(n, k + 1)
            .into_iter()
            .map(|c| {
                c[1..]
                    .iter()
                    .map(|&v| v as f64 / n as f64)
                    .collect::<Vec<f64>>()
            })
            .map(|t| self.point(&t))
            .collect()
    }
}

/// All `k`-subsimplices of `T̂ᵈ` in lexicographic node order.
pub fn subsimplices(d: usize, k: usize) -> Vec<SubSimplex> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    combos(0, d + 1, k + 1, &mut cur, &mut out);
    out.into_iter()
        .map(|nodes| SubSimplex { d, nodes })
        .collect()
}

fn combos(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in start..n {
        cur.push(i);
        combos(i + 1, n, k, cur, out);
        cur.pop();
    }
}

fn determinant(m: &DenseMatrix) -> f64 {
    match LuFactors::factor(m) {
        Ok(lu) => lu.abs_determinant(),
        Err(_) => 0.0,
    }
}

/// Which domain an L² norm is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// The reference simplex itself; `f` has `d` variables.
    Reference,
    /// Face `i` of `T̂ᵈ`; `f` is given in that face's parameter (`d − 1` variables)
    /// and the norm carries the surface factor. For `d = 1` this is `|f|`.
    Face { d: usize, index: usize },
}

/// `∫ f g` over `T̂ᵏ` with `k = f.dim()`, exact up to the quadrature table.
pub fn inner_product(f: &SimplexPoly, g: &SimplexPoly) -> Result<f64, PolyError> {
    assert_eq!(f.dim(), g.dim());
    let rule = SimplexRule::new(f.dim(), f.actual_degree() + g.actual_degree())?;
    Ok(rule.integrate(|x| f.eval(x) * g.eval(x)))
}

/// `‖f‖_{L²(region)}` by Grundmann–Möller quadrature.
pub fn poly_quadrature_norm(f: &SimplexPoly, region: Region) -> Result<f64, PolyError> {
    match region {
        Region::Reference => Ok(inner_product(f, f)?.max(0.0).sqrt()),
        Region::Face { d, index } => {
            if index > d || f.dim() + 1 != d {
                return Err(PolyError::DimensionMismatch {
                    expected: d.saturating_sub(1),
                    got: f.dim(),
                });
            }
            let c1 = SubSimplex::face(d, index).gram_factor();
            Ok((c1 * inner_product(f, f)?).max(0.0).sqrt())
        }
    }
}
