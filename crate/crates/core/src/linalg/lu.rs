use super::{axpy, dot, DenseMatrix, LinalgError};

/// Largest order accepted by [`LuFactors::inverse`]; an explicit inverse of this
/// order already needs 8 GiB.
pub const MAX_DENSE_INVERSE_DIM: usize = 32_768;

/// `P A = L U` with unit lower `L`, stored in place.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: DenseMatrix,
    /// `perm[i]` is the original row that ended up in row `i`.
    perm: Vec<usize>,
}

impl LuFactors {
    /// Right-looking LU with partial pivoting. Pivot order depends only on the
    /// entries, so repeated factorizations are bit-identical.
    pub fn factor(a: &DenseMatrix) -> Result<Self, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::DimensionMismatch {
                expected: "square matrix".into(),
                got: format!("{}x{}", a.rows(), a.cols()),
            });
        }
        if !a.is_finite() {
            return Err(LinalgError::NonFinite);
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let tiny = a.max_abs() * f64::EPSILON * n.max(1) as f64;

        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].abs();
            for i in k + 1..n {
                let v = lu[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= tiny || best == 0.0 {
                return Err(LinalgError::SingularPivot { pivot: k });
            }
            if p != k {
                swap_rows(&mut lu, p, k);
                perm.swap(p, k);
            }
            let (head, tail) = lu.as_mut_slice().split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n..(k + 1) * n];
            let pivot = pivot_row[k];
            for row in tail.chunks_exact_mut(n) {
                let l = row[k] / pivot;
                row[k] = l;
                if l != 0.0 {
                    axpy(-l, &pivot_row[k + 1..], &mut row[k + 1..]);
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn abs_determinant(&self) -> f64 {
        (0..self.dim()).map(|i| self.lu[(i, i)].abs()).product()
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let n = self.dim();
        if b.len() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: format!("vector of length {n}"),
                got: format!("length {}", b.len()),
            });
        }
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        self.forward(&mut y, 0);
        self.backward(&mut y);
        Ok(y)
    }

    /// Explicit inverse, one column at a time. Column `j` of `P I` is a unit
    /// vector whose leading zeros are skipped in the forward sweep.
    pub fn inverse(&self) -> Result<DenseMatrix, LinalgError> {
        let n = self.dim();
        if n > MAX_DENSE_INVERSE_DIM {
            return Err(LinalgError::TooLarge {
                n,
                max: MAX_DENSE_INVERSE_DIM,
            });
        }
        let mut inv_row_of = vec![0usize; n];
        for (i, &p) in self.perm.iter().enumerate() {
            inv_row_of[p] = i;
        }
        let mut out = DenseMatrix::zeros(n, n);
        let mut x = vec![0.0; n];
        for j in 0..n {
            x.iter_mut().for_each(|v| *v = 0.0);
            let start = inv_row_of[j];
            x[start] = 1.0;
            self.forward(&mut x, start);
            self.backward(&mut x);
            for (i, v) in x.iter().enumerate() {
                out[(i, j)] = *v;
            }
        }
        Ok(out)
    }

    fn forward(&self, y: &mut [f64], start: usize) {
        let n = self.dim();
        for i in start + 1..n {
            let row = &self.lu.row(i)[start..i];
            let s = dot(row, &y[start..i]);
            y[i] -= s;
        }
    }

    fn backward(&self, y: &mut [f64]) {
        let n = self.dim();
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s = dot(&row[i + 1..], &y[i + 1..]);
            y[i] = (y[i] - s) / row[i];
        }
    }
}

fn swap_rows(m: &mut DenseMatrix, a: usize, b: usize) {
    let n = m.cols();
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let (head, tail) = m.as_mut_slice().split_at_mut(hi * n);
    head[lo * n..(lo + 1) * n].swap_with_slice(&mut tail[..n]);
}
