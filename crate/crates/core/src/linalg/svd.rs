//! One-sided (Hestenes) Jacobi SVD, plus a pivoted-QR front end for blocks
//! that are numerically low rank.

use super::{axpy, dot, DenseMatrix, LinalgError};

const MAX_SWEEPS: usize = 80;

/// Thin SVD `M ≈ U diag(s) Vᵀ` with `s` sorted descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DenseMatrix,
    pub s: Vec<f64>,
    pub v: DenseMatrix,
    /// Frobenius norm of the part of `M` not represented by the factors.
    /// Zero for a full decomposition.
    pub residual: f64,
    pub sweeps: usize,
}

impl Svd {
    /// `σ_{i+1}` (zero-based `i`). Indices past the computed factors fall back
    /// to the residual, capped by the last computed value.
    pub fn singular_value(&self, i: usize) -> f64 {
        if i < self.s.len() {
            self.s[i]
        } else if self.residual == 0.0 {
            0.0
        } else {
            self.s
                .last()
                .map_or(self.residual, |&last| last.min(self.residual))
        }
    }

    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// Best rank-`r` factor pair taken from this decomposition.
    pub fn truncate(&self, r: usize) -> LowRankFactor {
        let k = r.min(self.s.len());
        let m = self.u.rows();
        let n = self.v.rows();
        let x = DenseMatrix::from_fn(m, k, |i, j| self.u[(i, j)] * self.s[j]);
        let y = DenseMatrix::from_fn(n, k, |i, j| self.v[(i, j)]);
        LowRankFactor { x, y }
    }
}

/// `X Yᵀ` with `X: m×r`, `Y: n×r`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankFactor {
    pub x: DenseMatrix,
    pub y: DenseMatrix,
}

impl LowRankFactor {
    pub fn rank(&self) -> usize {
        self.x.cols()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let (m, n, r) = (self.x.rows(), self.y.rows(), self.rank());
        let mut out = DenseMatrix::zeros(m, n);
        for i in 0..m {
            let xi = self.x.row(i);
            let dst = out.row_mut(i);
            for (j, d) in dst.iter_mut().enumerate() {
                let yj = self.y.row(j);
                *d = (0..r).map(|k| xi[k] * yj[k]).sum();
            }
        }
        out
    }

    /// `y += X (Yᵀ x)`
    pub fn matvec_add(&self, x: &[f64], y: &mut [f64]) {
        let r = self.rank();
        if r == 0 {
            return;
        }
        let mut t = vec![0.0; r];
        for (j, &xj) in x.iter().enumerate() {
            axpy(xj, self.y.row(j), &mut t);
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += dot(self.x.row(i), &t);
        }
    }
}

/// Full thin SVD by one-sided Jacobi rotations on the columns of the taller
/// orientation of `a`.
pub fn jacobi_svd(a: &DenseMatrix) -> Result<Svd, LinalgError> {
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let (m, n) = (a.rows(), a.cols());
    if m >= n {
        let cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
        let (u, s, v, sweeps) = jacobi_columns(cols, m)?;
        Ok(Svd {
            u,
            s,
            v,
            residual: 0.0,
            sweeps,
        })
    } else {
        let cols: Vec<Vec<f64>> = (0..m).map(|i| a.row(i).to_vec()).collect();
        let (u, s, v, sweeps) = jacobi_columns(cols, n)?;
        Ok(Svd {
            u: v,
            s,
            v: u,
            residual: 0.0,
            sweeps,
        })
    }
}

/// Best rank-`r` approximation; `‖M − XYᵀ‖₂ = σ_{r+1}(M)`.
pub fn truncated_svd(a: &DenseMatrix, r: usize) -> Result<LowRankFactor, LinalgError> {
    Ok(jacobi_svd(a)?.truncate(r))
}

/// SVD of a numerically low-rank block. A column-pivoted Householder QR stops
/// once the trailing Frobenius norm drops below `rel_tol · ‖M‖_F` or the rank
/// reaches `max_rank`; Jacobi then runs on the small triangular factor.
/// Blocks with `min(m, n) ≤ 64` go straight to [`jacobi_svd`].
pub fn low_rank_svd(a: &DenseMatrix, rel_tol: f64, max_rank: usize) -> Result<Svd, LinalgError> {
    let (m, n) = (a.rows(), a.cols());
    if m.min(n) <= 64 {
        return jacobi_svd(a);
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    if m < n {
        let t = low_rank_svd(&a.transpose(), rel_tol, max_rank)?;
        return Ok(Svd {
            u: t.v,
            s: t.s,
            v: t.u,
            residual: t.residual,
            sweeps: t.sweeps,
        });
    }
    let total = a.frobenius_norm();
    let target = rel_tol * total;
    let kmax = max_rank.min(n).max(1);

    // column-major working copy
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut reflectors: Vec<(Vec<f64>, f64)> = Vec::with_capacity(kmax);
    let mut r_rows: Vec<Vec<f64>> = Vec::with_capacity(kmax);
    let mut residual = total;

    for k in 0..kmax {
        let norms: Vec<f64> = (k..n).map(|j| dot(&cols[j][k..], &cols[j][k..])).collect();
        residual = norms.iter().sum::<f64>().sqrt();
        if residual <= target {
            break;
        }
        let (jmax, _) =
            norms.iter().enumerate().fold(
                (0, -1.0),
                |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) },
            );
        let p = k + jmax;
        cols.swap(k, p);
        perm.swap(k, p);
        for row in r_rows.iter_mut() {
            row.swap(k, p);
        }

        let x = &cols[k][k..];
        let alpha = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let beta_sign = if x[0] >= 0.0 { -1.0 } else { 1.0 };
        let diag = beta_sign * alpha;
        let mut v = x.to_vec();
        v[0] -= diag;
        let vnorm2 = dot(&v, &v);
        let tau = if vnorm2 > 0.0 { 2.0 / vnorm2 } else { 0.0 };
        for col in cols.iter_mut().skip(k + 1) {
            let w = tau * dot(&v, &col[k..]);
            if w != 0.0 {
                axpy(-w, &v, &mut col[k..]);
            }
        }
        cols[k][k] = diag;
        for c in cols[k][k + 1..].iter_mut() {
            *c = 0.0;
        }
        let mut row = vec![0.0; n];
        for (j, c) in cols.iter().enumerate().skip(k) {
            row[j] = c[k];
        }
        r_rows.push(row);
        reflectors.push((v, tau));
    }
    if reflectors.len() == kmax {
        residual = (k_tail_norm(&cols, kmax)).sqrt();
    }
    let k = r_rows.len();
    if k == 0 {
        return Ok(Svd {
            u: DenseMatrix::zeros(m, 0),
            s: Vec::new(),
            v: DenseMatrix::zeros(n, 0),
            residual,
            sweeps: 0,
        });
    }

    // W = (R Pᵀ)ᵀ, n × k
    let w_cols: Vec<Vec<f64>> = (0..k)
        .map(|c| {
            let mut col = vec![0.0; n];
            for (j, &pj) in perm.iter().enumerate() {
                col[pj] = r_rows[c][j];
            }
            col
        })
        .collect();
    let (uw, s, vw, sweeps) = jacobi_columns(w_cols, n)?;
    // left vectors: Q [Vw; 0]
    let kk = s.len();
    let mut u = DenseMatrix::zeros(m, kk);
    for c in 0..kk {
        let mut z = vec![0.0; m];
        for i in 0..k {
            z[i] = vw[(i, c)];
        }
        for (idx, (v, tau)) in reflectors.iter().enumerate().rev() {
            let w = tau * dot(v, &z[idx..]);
            if w != 0.0 {
                axpy(-w, v, &mut z[idx..]);
            }
        }
        for (i, zi) in z.into_iter().enumerate() {
            u[(i, c)] = zi;
        }
    }
    Ok(Svd {
        u,
        s,
        v: uw,
        residual,
        sweeps,
    })
}

fn k_tail_norm(cols: &[Vec<f64>], k: usize) -> f64 {
    cols.iter().skip(k).map(|c| dot(&c[k..], &c[k..])).sum()
}

/// Jacobi on `cols` (each of length `len`). Returns `(U, s, V, sweeps)` where
/// `U` is `len × k`, `V` is `ncols × k`, `k = ncols`.
fn jacobi_columns(
    mut cols: Vec<Vec<f64>>,
    len: usize,
) -> Result<(DenseMatrix, Vec<f64>, DenseMatrix, usize), LinalgError> {
    let n = cols.len();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    let tol = (len.max(1) as f64) * f64::EPSILON;
    let mut sweeps = 0;
    let mut converged = n < 2;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(LinalgError::SvdNoConvergence { sweeps });
        }
        sweeps += 1;
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let (ci, cj) = pair_mut(&mut cols, i, j);
                let alpha = dot(ci, ci);
                let beta = dot(cj, cj);
                let gamma = dot(ci, cj);
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(ci, cj, c, s);
                let (vi, vj) = pair_mut(&mut v, i, j);
                rotate(vi, vj, c, s);
            }
        }
        converged = !rotated;
    }

    let mut order: Vec<(usize, f64)> = cols.iter().map(|c| dot(c, c).sqrt()).enumerate().collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut u = DenseMatrix::zeros(len, n);
    let mut vm = DenseMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (k, &(j, sigma)) in order.iter().enumerate() {
        s.push(sigma);
        if sigma > 0.0 {
            for (i, x) in cols[j].iter().enumerate() {
                u[(i, k)] = x / sigma;
            }
        }
        for (i, x) in v[j].iter().enumerate() {
            vm[(i, k)] = *x;
        }
    }
    Ok((u, s, vm, sweeps))
}

#[inline]
fn rotate(a: &mut [f64], b: &mut [f64], c: f64, s: f64) {
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (xa, yb) = (*x, *y);
        *x = c * xa - s * yb;
        *y = s * xa + c * yb;
    }
}

fn pair_mut<T>(v: &mut [T], i: usize, j: usize) -> (&mut T, &mut T) {
    debug_assert!(i < j);
    let (a, b) = v.split_at_mut(j);
    (&mut a[i], &mut b[0])
}
