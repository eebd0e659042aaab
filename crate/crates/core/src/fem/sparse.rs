use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::linalg::DenseMatrix;

use super::FemError;

/// Square matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds the matrix from a per-row list of columns (any order, duplicates
    /// allowed) with all values zero.
    pub(crate) fn with_pattern(mut rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for r in rows.iter_mut() {
            r.sort_unstable();
            r.dedup();
            debug_assert!(r.last().is_none_or(|&c| c < n));
            col_idx.extend_from_slice(r);
            row_ptr.push(col_idx.len());
        }
        let values = vec![0.0; col_idx.len()];
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Sums duplicate triplets. Entries equal to zero are dropped only when
    /// their transposed partner is zero too.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows = vec![Vec::new(); n];
        for &(i, j, _) in triplets {
            rows[i].push(j);
            rows[j].push(i);
        }
        let mut m = Self::with_pattern(rows);
        for &(i, j, v) in triplets {
            *m.entry_mut(i, j).expect("in pattern") += v;
        }
        m.drop_symmetric_zeros();
        m
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[a..b].binary_search(&j).ok().map(|k| a + k)
    }

    pub(crate) fn entry_mut(&mut self, i: usize, j: usize) -> Option<&mut f64> {
        self.position(i, j).map(|k| &mut self.values[k])
    }

    pub(crate) fn drop_symmetric_zeros(&mut self) {
        let keep: Vec<bool> = (0..self.n)
            .flat_map(|i| (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, k)))
            .map(|(i, k)| self.values[k] != 0.0 || self.get(self.col_idx[k], i) != 0.0)
            .collect();
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        row_ptr.push(0);
        let (mut cols, mut vals) = (Vec::new(), Vec::new());
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if keep[k] {
                    cols.push(self.col_idx[k]);
                    vals.push(self.values[k]);
                }
            }
            row_ptr.push(cols.len());
        }
        self.row_ptr = row_ptr;
        self.col_idx = cols;
        self.values = vals;
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.position(i, j).is_some()
    }

    /// `(column, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let t: Vec<(usize, usize, f64)> = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        let mut rows = vec![Vec::new(); self.n];
        for &(i, j, _) in &t {
            rows[i].push(j);
        }
        let mut m = Self::with_pattern(rows);
        for (i, j, v) in t {
            *m.entry_mut(i, j).expect("in pattern") = v;
        }
        m
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.triplets() {
            d.row_mut(i)[j] = v;
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A_ij − A_ji|`
    pub fn asymmetry(&self) -> f64 {
        self.triplets()
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_structurally_symmetric(&self) -> bool {
        self.triplets().all(|(i, j, _)| self.contains(j, i))
    }

    /// MatrixMarket `coordinate real general`, 1-based indices.
    pub fn write_matrix_market(&self, path: &Path) -> Result<(), FemError> {
        if path.as_os_str().is_empty() {
            return Err(FemError::EmptyPath);
        }
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.n, self.n, self.nnz())?;
        for (i, j, v) in self.triplets() {
            writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_matrix_market(path: &Path) -> Result<Self, FemError> {
        let r = BufReader::new(File::open(path)?);
        let bad = |line: usize, msg: &str| FemError::Parse {
            line,
            msg: msg.to_owned(),
        };
        let mut lines = r.lines().enumerate();
        let (_, banner) = lines.next().ok_or_else(|| bad(1, "empty file"))?;
        if !banner?.starts_with("%%MatrixMarket matrix coordinate real") {
            return Err(bad(1, "unsupported MatrixMarket banner"));
        }
        let mut header = None;
        let mut trip = Vec::new();
        for (i, l) in lines {
            let l = l?;
            let t = l.trim();
            if t.is_empty() || t.starts_with('%') {
                continue;
            }
            let f: Vec<&str> = t.split_whitespace().collect();
            if f.len() != 3 {
                return Err(bad(i + 1, "expected three fields"));
            }
            match header {
                None => {
                    let p = |s: &str| s.parse::<usize>().map_err(|e| bad(i + 1, &e.to_string()));
                    let (r, c, nz) = (p(f[0])?, p(f[1])?, p(f[2])?);
                    if r != c {
                        return Err(bad(i + 1, "matrix is not square"));
                    }
                    header = Some(r);
                    trip.reserve(nz);
                }
                Some(n) => {
                    let p = |s: &str| s.parse::<usize>().map_err(|e| bad(i + 1, &e.to_string()));
                    let (r, c) = (p(f[0])?, p(f[1])?);
                    if r == 0 || c == 0 || r > n || c > n {
                        return Err(bad(i + 1, "index out of range"));
                    }
                    let v: f64 = f[2]
                        .parse()
                        .map_err(|e: std::num::ParseFloatError| bad(i + 1, &e.to_string()))?;
                    trip.push((r - 1, c - 1, v));
                }
            }
        }
        let n = header.ok_or_else(|| bad(0, "missing size line"))?;
        // keep explicit entries exactly as written
        let mut rows = vec![Vec::new(); n];
        for &(i, j, _) in &trip {
            rows[i].push(j);
        }
        let mut m = Self::with_pattern(rows);
        for (i, j, v) in trip {
            *m.entry_mut(i, j).expect("in pattern") += v;
        }
        Ok(m)
    }
}
