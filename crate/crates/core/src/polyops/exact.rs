//! `Ĵ^p` and the bubble projection as exact rational operators on monomial
//! coefficients.
//!
//! With `λ_0 = 1 − Σ x_i` and `λ_i = x_i`, every monomial `x^q` is the
//! barycentric monomial `λ^{(0, q)}`, and `∫_{T̂ᵈ} λ^α = α! / (|α| + d)!`.
//! Face restrictions are affine substitutions with integer coefficients, the
//! face liftings are products of barycentric coordinates and `c_k = 1/(d−k)`.
//! Every ingredient of `Ĵ^p` is therefore rational. The operator matrix is
//! built exactly and rounded once, which keeps monomial coefficients of the
//! result accurate even where the floating-point recursion cancels badly.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::quadrature::compositions;

use super::{PolyError, SimplexPoly};

type Q = BigRational;

/// Exponents `q` with `|q| ≤ n` in `d` variables, by total degree.
pub(crate) fn monomials(d: usize, n: usize) -> Vec<Vec<usize>> {
    (0..=n).flat_map(|k| compositions(k, d)).collect()
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `∫_{T̂ᵈ} λ^α` with `α` of length `d + 1`.
fn bary_integral(alpha: &[usize]) -> Q {
    let d = alpha.len() - 1;
    let num = alpha
        .iter()
        .fold(BigInt::one(), |acc, &a| acc * factorial(a));
    Q::new(num, factorial(alpha.iter().sum::<usize>() + d))
}

#[derive(Debug, Clone, PartialEq)]
struct RatPoly {
    dim: usize,
    terms: BTreeMap<Vec<usize>, Q>,
}

impl RatPoly {
    fn constant(dim: usize, c: Q) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0; dim], c);
        }
        Self { dim, terms }
    }

    fn one(dim: usize) -> Self {
        Self::constant(dim, Q::one())
    }

    fn var(dim: usize, m: usize) -> Self {
        let mut q = vec![0; dim];
        q[m] = 1;
        Self {
            dim,
            terms: BTreeMap::from([(q, Q::one())]),
        }
    }

    /// `λ_i` on `T̂ᵈ`.
    fn lambda(d: usize, i: usize) -> Self {
        if i == 0 {
            (0..d).fold(Self::one(d), |acc, m| acc.sub(&Self::var(d, m)))
        } else {
            Self::var(d, i - 1)
        }
    }

    fn add_term(&mut self, q: Vec<usize>, c: Q) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(q).or_insert_with(Q::zero);
        *e += c;
        // keep the map free of cancelled terms
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (q, c) in &other.terms {
            out.add_term(q.clone(), c.clone());
        }
        out
    }

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Q::one()))
    }

    fn scale(&self, s: &Q) -> Self {
        if s.is_zero() {
            return Self {
                dim: self.dim,
                terms: BTreeMap::new(),
            };
        }
        Self {
            dim: self.dim,
            terms: self.terms.iter().map(|(q, c)| (q.clone(), c * s)).collect(),
        }
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = Self {
            dim: self.dim,
            terms: BTreeMap::new(),
        };
        for (qa, ca) in &self.terms {
            for (qb, cb) in &other.terms {
                out.add_term(qa.iter().zip(qb).map(|(a, b)| a + b).collect(), ca * cb);
            }
        }
        out
    }

    fn pow(&self, e: usize) -> Self {
        (0..e).fold(Self::one(self.dim), |acc, _| acc.mul(self))
    }

    /// Coefficient vector in the order of `basis`; every term must be listed.
    fn to_vec(&self, index: &HashMap<Vec<usize>, usize>, len: usize) -> Vec<Q> {
        let mut v = vec![Q::zero(); len];
        for (q, c) in &self.terms {
            v[index[q]] = c.clone();
        }
        v
    }
}

/// Dense rational matrix between monomial coefficient spaces.
#[derive(Debug, Clone)]
struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Q>,
}

impl Mat {
    fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Q::zero(); rows * cols],
        }
    }

    fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Q::one();
        }
        m
    }

    fn at(&self, i: usize, j: usize) -> &Q {
        &self.data[i * self.cols + j]
    }

    fn at_mut(&mut self, i: usize, j: usize) -> &mut Q {
        &mut self.data[i * self.cols + j]
    }

    /// Matrix whose column `j` holds the coefficients of `f(basis_in[j])`.
    fn from_columns(
        basis_in: &[Vec<usize>],
        basis_out: &[Vec<usize>],
        f: impl Fn(&[usize]) -> RatPoly,
    ) -> Self {
        let index = index_of(basis_out);
        let mut m = Self::zeros(basis_out.len(), basis_in.len());
        for (j, q) in basis_in.iter().enumerate() {
            for (i, v) in f(q).to_vec(&index, basis_out.len()).into_iter().enumerate() {
                *m.at_mut(i, j) = v;
            }
        }
        m
    }

    fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.at(k, j);
                    if !b.is_zero() {
                        let t = a * b;
                        *out.at_mut(i, j) += t;
                    }
                }
            }
        }
        out
    }

    fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    fn scale(&self, s: &Q) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// Rows stacked on top of each other.
    fn vstack(blocks: &[Mat]) -> Self {
        let cols = blocks[0].cols;
        let mut data = Vec::new();
        for b in blocks {
            assert_eq!(b.cols, cols);
            data.extend(b.data.iter().cloned());
        }
        Self {
            rows: data.len() / cols.max(1),
            cols,
            data,
        }
    }

    /// Columns side by side.
    fn hstack(blocks: &[Mat]) -> Self {
        let rows = blocks[0].rows;
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let mut off = 0;
        for b in blocks {
            assert_eq!(b.rows, rows);
            for i in 0..rows {
                for j in 0..b.cols {
                    *out.at_mut(i, off + j) = b.at(i, j).clone();
                }
            }
            off += b.cols;
        }
        out
    }

    /// Coefficients of `x^q` for `|q| ≤ n` padded into the basis of degree `m ≥ n`.
    fn embedding(d: usize, n: usize, m: usize) -> Self {
        let small = monomials(d, n);
        let index = index_of(&monomials(d, m));
        let mut e = Self::zeros(index.len(), small.len());
        for (j, q) in small.iter().enumerate() {
            *e.at_mut(index[q], j) = Q::one();
        }
        e
    }

    fn to_f64(&self) -> Vec<f64> {
        self.data
            .iter()
            .map(|v| {
                v.to_f64()
                    .unwrap_or_else(|| if v.is_negative() { f64::MIN } else { f64::MAX })
            })
            .collect()
    }
}

fn index_of(basis: &[Vec<usize>]) -> HashMap<Vec<usize>, usize> {
    basis
        .iter()
        .enumerate()
        .map(|(i, q)| (q.clone(), i))
        .collect()
}

/// Nodes of face `i` of `T̂ᵈ` in ascending order (all nodes but `i`).
fn face_nodes(d: usize, i: usize) -> Vec<usize> {
    (0..=d).filter(|&n| n != i).collect()
}

/// `x ∘ γ_i` with `γ_i(t) = N_{a_0} + Σ_j t_j (N_{a_{j+1}} − N_{a_0})`.
fn face_coordinates(d: usize, i: usize) -> Vec<RatPoly> {
    let a = face_nodes(d, i);
    let node = |n: usize, m: usize| if n == m + 1 { 1 } else { 0 };
    (0..d)
        .map(|m| {
            let mut x = RatPoly::constant(d - 1, Q::from_integer(node(a[0], m).into()));
            for j in 0..d - 1 {
                let c = node(a[j + 1], m) - node(a[0], m);
                if c != 0 {
                    x = x.add(&RatPoly::var(d - 1, j).scale(&Q::from_integer(c.into())));
                }
            }
            x
        })
        .collect()
}

/// Restriction to face `i`, degree `≤ n`.
fn restriction(d: usize, i: usize, n: usize) -> Mat {
    let xs = face_coordinates(d, i);
    Mat::from_columns(&monomials(d, n), &monomials(d - 1, n), |q| {
        q.iter()
            .zip(&xs)
            .fold(RatPoly::one(d - 1), |acc, (&e, x)| acc.mul(&x.pow(e)))
    })
}

/// `L_{Γ̂_i}`: `t^α ↦ (1 − λ_i)^{p−|α|} Π_j λ_{a_{j+1}}^{α_j}`.
fn lift_face(d: usize, i: usize, p: usize) -> Mat {
    let a = face_nodes(d, i);
    let s = RatPoly::one(d).sub(&RatPoly::lambda(d, i));
    Mat::from_columns(&monomials(d - 1, p), &monomials(d, p), |q| {
        let order: usize = q.iter().sum();
        q.iter().enumerate().fold(s.pow(p - order), |acc, (j, &e)| {
            acc.mul(&RatPoly::lambda(d, a[j + 1]).pow(e))
        })
    })
}

/// Combined lifting from `⊕_i P_p(Γ̂_i)` to `P_p(T̂ᵈ)`:
/// `M̂ Σ_{k<d} c̃_{k+1} (R̂M̂)^k` with `Π_k (1 − c_k X) = 1 − Σ c̃_k X^k`.
fn combined_lift(d: usize, p: usize) -> Mat {
    let m_hat = Mat::hstack(&(0..=d).map(|i| lift_face(d, i, p)).collect::<Vec<_>>());
    let r_hat = Mat::vstack(&(0..=d).map(|i| restriction(d, i, p)).collect::<Vec<_>>());
    let rm = r_hat.matmul(&m_hat);
    // c̃ from c_k = 1 / (d − k)
    let mut poly = vec![Q::one()];
    for k in 0..d {
        let ck = Q::new(BigInt::one(), BigInt::from(d - k));
        let mut next = vec![Q::zero(); poly.len() + 1];
        for (j, v) in poly.iter().enumerate() {
            next[j] += v;
            next[j + 1] -= &ck * v;
        }
        poly = next;
    }
    let ct: Vec<Q> = poly[1..].iter().map(|v| -v).collect();
    let mut power = Mat::identity(rm.rows);
    let mut acc = Mat::zeros(rm.rows, rm.cols);
    for (k, c) in ct.iter().enumerate() {
        if k > 0 {
            power = rm.matmul(&power);
        }
        acc = acc.add(&power.scale(c));
    }
    m_hat.matmul(&acc)
}

/// Solves `G X = M` by Gauss–Jordan elimination; `G` is SPD.
fn solve(mut g: Vec<Vec<Q>>, mut m: Vec<Vec<Q>>) -> Vec<Vec<Q>> {
    let n = g.len();
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| !g[r][col].is_zero())
            .expect("Gram matrix of a basis is nonsingular");
        g.swap(col, piv);
        m.swap(col, piv);
        let inv = g[col][col].recip();
        for v in g[col].iter_mut().chain(m[col].iter_mut()) {
            *v = &*v * &inv;
        }
        for r in 0..n {
            if r == col || g[r][col].is_zero() {
                continue;
            }
            let f = g[r][col].clone();
            for k in 0..n {
                let t = &f * &g[col][k];
                g[r][k] -= t;
            }
            for k in 0..m[col].len() {
                let t = &f * &m[col][k];
                m[r][k] -= t;
            }
        }
    }
    m
}

/// `P̂` from monomials of degree `≤ n_in` to monomials of degree `≤ p`.
fn bubble_projection(d: usize, p: usize, n_in: usize) -> Mat {
    let rows = monomials(d, p);
    let cols = monomials(d, n_in);
    if p < d + 1 {
        return Mat::zeros(rows.len(), cols.len());
    }
    let bubbles: Vec<Vec<usize>> = compositions(p - d - 1, d + 1)
        .into_iter()
        .map(|g| g.into_iter().map(|e| e + 1).collect())
        .collect();
    let add =
        |a: &[usize], b: &[usize]| -> Vec<usize> { a.iter().zip(b).map(|(x, y)| x + y).collect() };
    let gram = bubbles
        .iter()
        .map(|bi| {
            bubbles
                .iter()
                .map(|bj| bary_integral(&add(bi, bj)))
                .collect()
        })
        .collect();
    let moments = bubbles
        .iter()
        .map(|bi| {
            cols.iter()
                .map(|q| {
                    let mut alpha = vec![0];
                    alpha.extend(q);
                    bary_integral(&add(bi, &alpha))
                })
                .collect()
        })
        .collect();
    let x = solve(gram, moments);
    let index = index_of(&rows);
    let mut out = Mat::zeros(rows.len(), cols.len());
    for (b, xb) in bubbles.iter().zip(&x) {
        let poly = b.iter().enumerate().fold(RatPoly::one(d), |acc, (i, &e)| {
            acc.mul(&RatPoly::lambda(d, i).pow(e))
        });
        for (q, c) in &poly.terms {
            let r = index[q];
            for (j, v) in xb.iter().enumerate() {
                *out.at_mut(r, j) += c * v;
            }
        }
    }
    out
}

/// `Ĵ^p_d` from monomials of degree `≤ p + 2` to monomials of degree `≤ p`:
/// `G + P̂ (I − E G)` with `G` the combined lifting of the reduced face traces
/// and `E` the embedding of degree `p` into degree `p + 2`.
fn degree_reduce_matrix(d: usize, p: usize) -> Arc<Mat> {
    static CACHE: OnceLock<Exact> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(m) = cache.lock().expect("cache lock").get(&(d, p)) {
        return m.clone();
    }
    let m = if d == 0 {
        Mat::embedding(0, 0, 0)
    } else {
        let face = degree_reduce_matrix(d - 1, p);
        let traces = Mat::vstack(
            &(0..=d)
                .map(|i| face.matmul(&restriction(d, i, p + 2)))
                .collect::<Vec<_>>(),
        );
        let g = combined_lift(d, p).matmul(&traces);
        let n_in = monomials(d, p + 2).len();
        let residual = Mat::identity(n_in).sub(&Mat::embedding(d, p, p + 2).matmul(&g));
        g.add(&bubble_projection(d, p, p + 2).matmul(&residual))
    };
    let m = Arc::new(m);
    cache
        .lock()
        .expect("cache lock")
        .entry((d, p))
        .or_insert(m)
        .clone()
}

/// Exact `Ĵ^p` matrices by dimension and degree.
type Exact = Mutex<HashMap<(usize, usize), Arc<Mat>>>;

/// Rounded operator matrices, keyed by dimension, output degree and input degree.
type Rounded = Mutex<HashMap<(u8, usize, usize, usize), Arc<Vec<f64>>>>;

fn rounded(
    kind: u8,
    d: usize,
    p: usize,
    n_in: usize,
    build: impl FnOnce() -> Vec<f64>,
) -> Arc<Vec<f64>> {
    static CACHE: OnceLock<Rounded> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(m) = cache.lock().expect("cache lock").get(&(kind, d, p, n_in)) {
        return m.clone();
    }
    let m = Arc::new(build());
    cache
        .lock()
        .expect("cache lock")
        .entry((kind, d, p, n_in))
        .or_insert(m)
        .clone()
}

fn apply(matrix: &[f64], f: &SimplexPoly, n_in: usize, p: usize) -> Result<SimplexPoly, PolyError> {
    let d = f.dim();
    let cols = monomials(d, n_in);
    let fc: Vec<f64> = cols
        .iter()
        .map(|q| f.coeff(&q.iter().map(|&e| e as u32).collect::<Vec<_>>()))
        .collect();
    let terms = monomials(d, p).into_iter().enumerate().map(|(i, q)| {
        let row = &matrix[i * cols.len()..(i + 1) * cols.len()];
        (
            q.into_iter().map(|e| e as u32).collect(),
            row.iter().zip(&fc).map(|(a, b)| a * b).sum(),
        )
    });
    SimplexPoly::from_terms(d, p, terms)
}

/// L² projection of `f` onto `P⁰_p(T̂ᵈ)`.
pub(crate) fn exact_bubble_projection(f: &SimplexPoly, p: usize) -> Result<SimplexPoly, PolyError> {
    let (d, n_in) = (f.dim(), f.actual_degree());
    let m = rounded(0, d, p, n_in, || bubble_projection(d, p, n_in).to_f64());
    apply(&m, f, n_in, p)
}

/// `Ĵ^p f` for `deg f ≤ p + 2`.
pub(crate) fn exact_degree_reduce(f: &SimplexPoly, p: usize) -> Result<SimplexPoly, PolyError> {
    let d = f.dim();
    let m = rounded(1, d, p, p + 2, || degree_reduce_matrix(d, p).to_f64());
    apply(&m, f, p + 2, p)
}
