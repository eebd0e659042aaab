use super::simplex::{barycentric, barycentric_poly, subsimplices, SubSimplex};
use super::{PolyError, SimplexPoly};

/// Default tolerance for matching face traces on shared subsimplices.
pub const COMPAT_TOL: f64 = 1e-11;

const COMPAT_SAMPLES_PER_EDGE: usize = 8;

/// Lifts `f`, given in the parameter of face `face` (opposite node `face`),
/// into `T̂ᵈ`:
///
/// `(L f)(x) = Σ_α f_α (1 − λ_apex)^{p−|α|} Π_j λ_{a_j}^{α_j}`
///
/// where `a_0 < … < a_{d−1}` are the face nodes. The trace on the face is `f`,
/// the value at the apex is 0 and the result lies in `P_p`.
pub fn lift_face(
    f: &SimplexPoly,
    face: usize,
    d: usize,
    p: usize,
) -> Result<SimplexPoly, PolyError> {
    if d == 0 || face > d {
        return Err(PolyError::InvalidSubsimplex {
            d,
            nodes: vec![face],
        });
    }
    if f.dim() + 1 != d {
        return Err(PolyError::DimensionMismatch {
            expected: d - 1,
            got: f.dim(),
        });
    }
    let actual = f.actual_degree();
    if actual > p {
        return Err(PolyError::DegreeExceeded { actual, allowed: p });
    }
    let gamma = SubSimplex::face(d, face);
    let s = SimplexPoly::constant(d, 1.0).sub(&barycentric_poly(d, face));
    let s_pow = powers(&s, p);
    let lam_pow: Vec<Vec<SimplexPoly>> = gamma.nodes()[1..]
        .iter()
        .map(|&n| powers(&barycentric_poly(d, n), p))
        .collect();

    let mut out = SimplexPoly::zero(d, p);
    for (q, c) in f.terms() {
        let mut term = s_pow[p - q.order()].scale(c);
        for (j, &e) in q.as_slice().iter().enumerate() {
            if e > 0 {
                term = term.mul(&lam_pow[j][e as usize]);
            }
        }
        out = out.add(&term);
    }
    out.with_degree(p)
}

fn powers(base: &SimplexPoly, n: usize) -> Vec<SimplexPoly> {
    let mut v = vec![SimplexPoly::constant(base.dim(), 1.0)];
    for e in 1..=n {
        let next = v[e - 1].mul(base);
        v.push(next);
    }
    v
}

/// A continuous piecewise polynomial on `∂T̂ᵈ`: one polynomial per face,
/// each in that face's parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPoly {
    d: usize,
    degree: usize,
    faces: Vec<SimplexPoly>,
}

impl BoundaryPoly {
    /// Validates dimensions, degrees and trace compatibility on every shared
    /// `(d−2)`-subsimplex.
    pub fn new(d: usize, degree: usize, faces: Vec<SimplexPoly>) -> Result<Self, PolyError> {
        let b = Self::new_unchecked(d, degree, faces)?;
        let scale = b
            .faces
            .iter()
            .map(SimplexPoly::max_abs_coeff)
            .fold(1.0, f64::max);
        let res = b.compatibility_residual();
        if res > COMPAT_TOL * scale {
            return Err(PolyError::IncompatibleTraces { residual: res });
        }
        Ok(b)
    }

    /// Checks shapes only; traces are trusted to agree.
    pub fn new_unchecked(
        d: usize,
        degree: usize,
        faces: Vec<SimplexPoly>,
    ) -> Result<Self, PolyError> {
        if d == 0 {
            return Err(PolyError::InvalidSubsimplex {
                d,
                nodes: Vec::new(),
            });
        }
        if faces.len() != d + 1 {
            return Err(PolyError::FaceCount {
                expected: d + 1,
                got: faces.len(),
            });
        }
        let mut faces = faces;
        for f in faces.iter_mut() {
            if f.dim() + 1 != d {
                return Err(PolyError::DimensionMismatch {
                    expected: d - 1,
                    got: f.dim(),
                });
            }
            *f = std::mem::replace(f, SimplexPoly::zero(d - 1, 0)).with_degree(degree)?;
        }
        Ok(Self { d, degree, faces })
    }

    pub fn zero(d: usize, degree: usize) -> Self {
        Self {
            d,
            degree,
            faces: vec![SimplexPoly::zero(d - 1, degree); d + 1],
        }
    }

    /// `R̂ f`: traces of a volume polynomial on every face.
    pub fn restrict(f: &SimplexPoly) -> Self {
        let d = f.dim();
        assert!(d >= 1, "no boundary in dimension 0");
        let faces = (0..=d)
            .map(|i| {
                let r = SubSimplex::face(d, i).restrict(f);
                r.with_degree(f.degree()).expect("restriction keeps degree")
            })
            .collect();
        Self {
            d,
            degree: f.degree(),
            faces,
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn faces(&self) -> &[SimplexPoly] {
        &self.faces
    }

    pub fn face(&self, i: usize) -> &SimplexPoly {
        &self.faces[i]
    }

    /// Value of face `i`'s polynomial at the Cartesian point `x` (assumed on that face).
    pub fn eval_face(&self, i: usize, x: &[f64]) -> f64 {
        let t = SubSimplex::face(self.d, i).param_of(x);
        self.faces[i].eval(&t)
    }

    /// Value at a boundary point, read from the face it lies closest to.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let lam = barycentric(x);
        let i = lam
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.eval_face(i, x)
    }

    /// Largest trace mismatch between two faces on their shared subsimplex.
    pub fn compatibility_residual(&self) -> f64 {
        if self.d < 2 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..=self.d {
            for j in i + 1..=self.d {
                let shared: Vec<usize> = (0..=self.d).filter(|&n| n != i && n != j).collect();
                let sigma = SubSimplex::new(self.d, shared).expect("valid node set");
                for x in sigma.sample_points(COMPAT_SAMPLES_PER_EDGE) {
                    worst = worst.max((self.eval_face(i, &x) - self.eval_face(j, &x)).abs());
                }
            }
        }
        worst
    }

    /// Largest `|f|` over sample points on every face.
    pub fn max_abs_sampled(&self, per_edge: usize) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..=self.d {
            for x in SubSimplex::face(self.d, i).sample_points(per_edge) {
                worst = worst.max(self.eval_face(i, &x).abs());
            }
        }
        worst
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.faces
            .iter()
            .map(SimplexPoly::max_abs_coeff)
            .fold(0.0, f64::max)
    }

    pub fn add(&self, other: &BoundaryPoly) -> BoundaryPoly {
        assert_eq!(self.d, other.d);
        let faces = self
            .faces
            .iter()
            .zip(&other.faces)
            .map(|(a, b)| a.add(b))
            .collect();
        Self {
            d: self.d,
            degree: self.degree.max(other.degree),
            faces,
        }
    }

    pub fn sub(&self, other: &BoundaryPoly) -> BoundaryPoly {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> BoundaryPoly {
        Self {
            d: self.d,
            degree: self.degree,
            faces: self.faces.iter().map(|f| f.scale(s)).collect(),
        }
    }
}

/// `M̂ f = Σ_i L_{Γ_i} f_i`
pub fn lift_sum(f: &BoundaryPoly) -> Result<SimplexPoly, PolyError> {
    let d = f.dim();
    let mut out = SimplexPoly::zero(d, f.degree());
    for (i, fi) in f.faces().iter().enumerate() {
        out = out.add(&lift_face(fi, i, d, f.degree())?);
    }
    Ok(out)
}

/// `R̂ M̂ f`
pub fn restrict_lift_sum(f: &BoundaryPoly) -> Result<BoundaryPoly, PolyError> {
    Ok(BoundaryPoly::restrict(&lift_sum(f)?))
}

/// `c_k = 1 / (d − k)` for `k = 0, …, d−1`.
pub fn lift_coefficients(d: usize) -> Vec<f64> {
    (0..d).map(|k| 1.0 / (d - k) as f64).collect()
}

/// `c̃_1, …, c̃_d` from `Π_k (1 − c_k X) = 1 − Σ_k c̃_k X^k`.
pub fn expanded_coefficients(c: &[f64]) -> Vec<f64> {
    let mut q = vec![1.0];
    for &ck in c {
        let mut next = vec![0.0; q.len() + 1];
        for (i, &qi) in q.iter().enumerate() {
            next[i] += qi;
            next[i + 1] -= ck * qi;
        }
        q = next;
    }
    q[1..].iter().map(|v| -v).collect()
}

/// Polynomial-preserving lifting `L̂ f = M̂ Σ_{k<d} c̃_{k+1} (R̂M̂)^k f`.
pub fn combined_lift(f: &BoundaryPoly) -> Result<SimplexPoly, PolyError> {
    let scale = f.max_abs_coeff().max(1.0);
    let res = f.compatibility_residual();
    if res > COMPAT_TOL * scale {
        return Err(PolyError::IncompatibleTraces { residual: res });
    }
    combined_lift_with(f, &lift_coefficients(f.dim()))
}

/// [`combined_lift`] with caller-supplied `c_k`; no compatibility check.
pub fn combined_lift_with(f: &BoundaryPoly, c: &[f64]) -> Result<SimplexPoly, PolyError> {
    let ct = expanded_coefficients(c);
    let mut acc = BoundaryPoly::zero(f.dim(), f.degree());
    let mut power = f.clone();
    for (k, &ck) in ct.iter().enumerate() {
        if k > 0 {
            power = restrict_lift_sum(&power)?;
        }
        acc = acc.add(&power.scale(ck));
    }
    lift_sum(&acc)
}

/// `(id − c_{d−1} R̂M̂) ⋯ (id − c_0 R̂M̂) f`; identically zero for the true `c_k`.
pub fn telescoping_product(f: &BoundaryPoly, c: &[f64]) -> Result<BoundaryPoly, PolyError> {
    let mut g = f.clone();
    for &ck in c {
        let rm = restrict_lift_sum(&g)?;
        g = g.sub(&rm.scale(ck));
    }
    Ok(g)
}

/// Value of a boundary polynomial at node `n`, read from a face containing it.
pub fn node_value(f: &BoundaryPoly, n: usize) -> f64 {
    let d = f.dim();
    let face = if n == 0 { 1 } else { 0 };
    let x = super::simplex::reference_node(d, n);
    f.eval_face(face, &x)
}

/// All `k`-subsimplices lying inside face `i`.
pub fn subsimplices_of_face(d: usize, i: usize, k: usize) -> Vec<SubSimplex> {
    subsimplices(d, k)
        .into_iter()
        .filter(|s| !s.contains_node(i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyops::simplex::{barycentric_monomial, poly_quadrature_norm, Region};

    #[test]
    fn one_dimensional_lift_of_constant() {
        // face opposite node 1 is the point x = 0; lift is (1 − x)^p
        let f = SimplexPoly::constant(0, 1.0);
        let l = lift_face(&f, 1, 1, 2).unwrap();
        let expected = SimplexPoly::affine(1.0, &[-1.0]).pow(2);
        assert!(l.max_coeff_diff(&expected) < 1e-15);
        let l0 = lift_face(&f, 0, 1, 3).unwrap();
        assert!(l0.max_coeff_diff(&SimplexPoly::coordinate(1, 0).pow(3)) < 1e-15);
    }

    #[test]
    fn lift_of_zero_is_zero() {
        let f = SimplexPoly::zero(1, 3);
        assert!(lift_face(&f, 0, 2, 3).unwrap().is_zero());
    }

    #[test]
    fn lift_rejects_excess_degree() {
        let f = SimplexPoly::coordinate(1, 0).pow(4);
        assert!(matches!(
            lift_face(&f, 0, 2, 3),
            Err(PolyError::DegreeExceeded { .. })
        ));
    }

    #[test]
    fn trace_and_apex() {
        // f(t) = 1 + 2t − t² on the hypotenuse of T̂²
        let f = SimplexPoly::from_terms(1, 2, [(vec![0], 1.0), (vec![1], 2.0), (vec![2], -1.0)])
            .unwrap();
        let l = lift_face(&f, 0, 2, 3).unwrap();
        let face = SubSimplex::face(2, 0);
        for t in [0.0, 0.25, 0.6, 1.0] {
            let x = face.point(&[t]);
            assert!((l.eval(&x) - f.eval(&[t])).abs() < 1e-14);
        }
        assert!(l.eval(&[0.0, 0.0]).abs() < 1e-15);
        assert!(l.actual_degree() <= 3);
    }

    #[test]
    fn norm_identity_example() {
        // ‖L f‖² = C₂ / (2p + d) · ∫ f(t)² dt with C₂ = 1 on T̂ᵈ
        let f = SimplexPoly::from_terms(1, 2, [(vec![0], 0.5), (vec![2], 3.0)]).unwrap();
        for face in 0..3 {
            let l = lift_face(&f, face, 2, 2).unwrap();
            let lhs = poly_quadrature_norm(&l, Region::Reference).unwrap().powi(2);
            let rhs = poly_quadrature_norm(&f, Region::Reference).unwrap().powi(2) / 6.0;
            assert!(
                (lhs - rhs).abs() < 1e-13 * rhs,
                "face {face}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn expanded_coefficients_small_cases() {
        // d = 1: 1 − X
        assert_eq!(expanded_coefficients(&lift_coefficients(1)), vec![1.0]);
        // d = 2: (1 − X/2)(1 − X) = 1 − 3X/2 + X²/2
        let ct = expanded_coefficients(&lift_coefficients(2));
        assert!((ct[0] - 1.5).abs() < 1e-15 && (ct[1] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn combined_lift_reproduces_traces() {
        for d in 1..=3 {
            let p = 3;
            let vol = barycentric_monomial(d, &{
                let mut g = vec![0; d + 1];
                g[0] = 1;
                g[d] = 2;
                g
            })
            .add(&SimplexPoly::constant(d, 0.7))
            .with_degree(p)
            .unwrap();
            let f = BoundaryPoly::restrict(&vol);
            let l = combined_lift(&f).unwrap();
            let back = BoundaryPoly::restrict(&l);
            assert!(back.sub(&f).max_abs_sampled(6) < 1e-12, "d = {d}");
        }
    }

    #[test]
    fn incompatible_faces_rejected() {
        let faces = vec![
            SimplexPoly::constant(1, 1.0),
            SimplexPoly::constant(1, 0.0),
            SimplexPoly::constant(1, 0.0),
        ];
        assert!(matches!(
            BoundaryPoly::new(2, 1, faces.clone()),
            Err(PolyError::IncompatibleTraces { .. })
        ));
        let f = BoundaryPoly::new_unchecked(2, 1, faces).unwrap();
        assert!(combined_lift(&f).is_err());
    }
}
