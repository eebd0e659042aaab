use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use super::PolyError;

/// Exponent vector `q ∈ ℕᵈ` of the monomial `x^q`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(q: Vec<u32>) -> Self {
        Self(q)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut q = vec![0; dim];
        q[i] = 1;
        Self(q)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|q| = Σ qᵢ`
    pub fn order(&self) -> usize {
        self.0.iter().map(|&v| v as usize).sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    fn plus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(q: Vec<u32>) -> Self {
        Self(q)
    }
}

/// Polynomial of total degree `≤ degree` in `dim` variables, stored by its
/// monomial coefficients. Exact zeros are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoly {
    dim: usize,
    degree: usize,
    coeffs: BTreeMap<MultiIndex, f64>,
}

impl SimplexPoly {
    pub fn zero(dim: usize, degree: usize) -> Self {
        Self {
            dim,
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut p = Self::zero(dim, 0);
        p.add_term(MultiIndex::zeros(dim), c);
        p
    }

    /// The coordinate function `x ↦ x_i`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut p = Self::zero(dim, 1);
        p.add_term(MultiIndex::unit(dim, i), 1.0);
        p
    }

    /// `x ↦ c0 + Σ lin[i] x_i`
    pub fn affine(c0: f64, lin: &[f64]) -> Self {
        let dim = lin.len();
        let mut p = Self::zero(dim, 1);
        p.add_term(MultiIndex::zeros(dim), c0);
        for (i, &c) in lin.iter().enumerate() {
            p.add_term(MultiIndex::unit(dim, i), c);
        }
        p
    }

    pub fn from_terms(
        dim: usize,
        degree: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, f64)>,
    ) -> Result<Self, PolyError> {
        let mut p = Self::zero(dim, degree);
        for (q, c) in terms {
            let q = MultiIndex(q);
            if q.dim() != dim {
                return Err(PolyError::DimensionMismatch {
                    expected: dim,
                    got: q.dim(),
                });
            }
            if q.order() > degree {
                return Err(PolyError::DegreeExceeded {
                    actual: q.order(),
                    allowed: degree,
                });
            }
            if !c.is_finite() {
                return Err(PolyError::NonFinite);
            }
            p.add_term(q, c);
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Declared degree `p` of the space `P_p` this polynomial belongs to.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Largest `|q|` with a nonzero coefficient (0 for the zero polynomial).
    pub fn actual_degree(&self) -> usize {
        self.coeffs.keys().map(MultiIndex::order).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.coeffs.iter().map(|(q, &c)| (q, c))
    }

    pub fn coeff(&self, q: &[u32]) -> f64 {
        self.coeffs
            .get(&MultiIndex(q.to_vec()))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Largest coefficient-wise difference.
    pub fn max_coeff_diff(&self, other: &SimplexPoly) -> f64 {
        self.sub(other).max_abs_coeff()
    }

    /// Re-labels the polynomial as an element of `P_p`; fails if it does not fit.
    pub fn with_degree(mut self, p: usize) -> Result<Self, PolyError> {
        let actual = self.actual_degree();
        if actual > p {
            return Err(PolyError::DegreeExceeded { actual, allowed: p });
        }
        self.degree = p;
        Ok(self)
    }

    fn add_term(&mut self, q: MultiIndex, c: f64) {
        if c == 0.0 {
            return;
        }
        match self.coeffs.entry(q) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == 0.0 {
                    o.remove();
                }
            }
        }
    }

    fn check_dim(&self, other: &SimplexPoly) {
        assert_eq!(
            self.dim, other.dim,
            "polynomials live in different dimensions"
        );
    }

    pub fn add(&self, other: &SimplexPoly) -> SimplexPoly {
        self.check_dim(other);
        let mut out = self.clone();
        out.degree = self.degree.max(other.degree);
        for (q, &c) in &other.coeffs {
            out.add_term(q.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &SimplexPoly) -> SimplexPoly {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> SimplexPoly {
        if s == 0.0 {
            return Self::zero(self.dim, self.degree);
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|(q, c)| (q.clone(), c * s))
            .collect();
        Self {
            dim: self.dim,
            degree: self.degree,
            coeffs,
        }
    }

    pub fn mul(&self, other: &SimplexPoly) -> SimplexPoly {
        self.check_dim(other);
        let mut out = Self::zero(self.dim, self.degree + other.degree);
        for (qa, ca) in &self.coeffs {
            for (qb, cb) in &other.coeffs {
                out.add_term(qa.plus(qb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, e: usize) -> SimplexPoly {
        let mut out = Self::constant(self.dim, 1.0);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim, "point dimension");
        let maxdeg = self.actual_degree();
        // powers[i][e] = x_i^e
        let powers: Vec<Vec<f64>> = x
            .iter()
            .map(|&xi| {
                let mut v = Vec::with_capacity(maxdeg + 1);
                let mut acc = 1.0;
                for _ in 0..=maxdeg {
                    v.push(acc);
                    acc *= xi;
                }
                v
            })
            .collect();
        self.coeffs
            .iter()
            .map(|(q, c)| {
                q.0.iter()
                    .enumerate()
                    .fold(*c, |acc, (i, &e)| acc * powers[i][e as usize])
            })
            .sum()
    }

    /// `t ↦ f(A t + b)` with `A` given as `dim` rows of length `m`.
    pub fn compose_affine(&self, a: &[Vec<f64>], b: &[f64]) -> SimplexPoly {
        assert_eq!(a.len(), self.dim, "affine map rows");
        assert_eq!(b.len(), self.dim, "affine map offset");
        let m = a.first().map_or(0, Vec::len);
        let maxdeg = self.actual_degree();
        let powers: Vec<Vec<SimplexPoly>> = a
            .iter()
            .zip(b)
            .map(|(row, &bk)| {
                let lin = SimplexPoly::affine(bk, row);
                let mut v = vec![SimplexPoly::constant(m, 1.0)];
                for e in 1..=maxdeg {
                    let next = v[e - 1].mul(&lin);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Self::zero(m, self.degree);
        for (q, &c) in &self.coeffs {
            let mut term = SimplexPoly::constant(m, c);
            for (k, &e) in q.0.iter().enumerate() {
                if e > 0 {
                    term = term.mul(&powers[k][e as usize]);
                }
            }
            for (qq, cc) in term.coeffs {
                out.add_term(qq, cc);
            }
        }
        out
    }
}

impl fmt::Display for SimplexPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (n, (q, c)) in self.coeffs.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c:e}")?;
            for (i, &e) in q.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "·x{i}")?,
                    _ => write!(f, "·x{i}^{e}")?,
                }
            }
        }
        Ok(())
    }
}
