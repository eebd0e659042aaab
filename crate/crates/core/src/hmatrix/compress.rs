use crate::linalg::{
    low_rank_svd, spectral_norm, DenseMatrix, LowRankFactor, SpectralEstimate, Svd,
};

use super::partition::{BlockKind, BlockPartition};
use super::HMatrixError;

/// Pivoted-QR cut-off used before the Jacobi SVD of an admissible block.
const SVD_REL_TOL: f64 = 1e-15;
pub const POWER_MAX_ITER: usize = 200;
pub const POWER_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum BlockPayload {
    LowRank(LowRankFactor),
    Dense(DenseMatrix),
}

#[derive(Debug, Clone)]
pub struct HMatrix {
    partition: BlockPartition,
    payloads: Vec<BlockPayload>,
    rank: usize,
}

impl HMatrix {
    pub(crate) fn from_parts(
        partition: BlockPartition,
        payloads: Vec<BlockPayload>,
        rank: usize,
    ) -> Self {
        Self {
            partition,
            payloads,
            rank,
        }
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn payloads(&self) -> &[BlockPayload] {
        &self.payloads
    }

    /// Global rank bound `r`.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.partition.dim()
    }

    /// `Σ_adm k(|I| + |J|) + Σ_small |I||J|` with `k` the stored rank.
    pub fn memory_units(&self) -> usize {
        self.partition
            .blocks()
            .iter()
            .zip(&self.payloads)
            .map(|(b, p)| match p {
                BlockPayload::LowRank(f) => f.rank() * (b.rows + b.cols),
                BlockPayload::Dense(_) => b.rows * b.cols,
            })
            .sum()
    }

    /// `y = H x` in the original dof order.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>, HMatrixError> {
        let n = self.dim();
        if x.len() != n {
            return Err(HMatrixError::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        let perm = self.partition.perm();
        let xp: Vec<f64> = perm.iter().map(|&i| x[i]).collect();
        let mut yp = vec![0.0; n];
        for (b, p) in self.partition.blocks().iter().zip(&self.payloads) {
            let xs = &xp[b.col_lo..b.col_lo + b.cols];
            let ys = &mut yp[b.row_lo..b.row_lo + b.rows];
            match p {
                BlockPayload::LowRank(f) => f.matvec_add(xs, ys),
                BlockPayload::Dense(d) => {
                    for (yi, row) in ys.iter_mut().zip(d.as_slice().chunks_exact(b.cols)) {
                        *yi += row.iter().zip(xs).map(|(a, b)| a * b).sum::<f64>();
                    }
                }
            }
        }
        let mut y = vec![0.0; n];
        for (k, &i) in perm.iter().enumerate() {
            y[i] = yp[k];
        }
        Ok(y)
    }

    /// Dense reconstruction in the original dof order.
    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.dim();
        let perm = self.partition.perm();
        let mut out = DenseMatrix::zeros(n, n);
        for (b, p) in self.partition.blocks().iter().zip(&self.payloads) {
            let blk = match p {
                BlockPayload::LowRank(f) => f.to_dense(),
                BlockPayload::Dense(d) => d.clone(),
            };
            for i in 0..b.rows {
                let row = out.row_mut(perm[b.row_lo + i]);
                for (j, &v) in blk.row(i).iter().enumerate() {
                    row[perm[b.col_lo + j]] = v;
                }
            }
        }
        out
    }
}

/// Block of `m` (original order) addressed by permuted ranges.
fn extract(
    m: &DenseMatrix,
    perm: &[usize],
    row_lo: usize,
    rows: usize,
    col_lo: usize,
    cols: usize,
) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |i, j| m[(perm[row_lo + i], perm[col_lo + j])])
}

/// One SVD per admissible block, reused for every truncation rank.
#[derive(Debug, Clone)]
pub struct BlockSvds {
    partition: BlockPartition,
    /// `Some` for admissible blocks.
    svds: Vec<Option<Svd>>,
    dense: Vec<Option<DenseMatrix>>,
}

impl BlockSvds {
    /// `dense` is `A⁻¹` in the original dof order. Singular values up to
    /// `σ_{max_rank+1}` are resolved.
    pub fn new(
        dense: &DenseMatrix,
        partition: &BlockPartition,
        max_rank: usize,
    ) -> Result<Self, HMatrixError> {
        let n = partition.dim();
        if dense.rows() != n || dense.cols() != n {
            return Err(HMatrixError::DimensionMismatch {
                expected: n,
                got: dense.rows(),
            });
        }
        let perm = partition.perm();
        let mut svds = Vec::with_capacity(partition.blocks().len());
        let mut small = Vec::with_capacity(partition.blocks().len());
        for b in partition.blocks() {
            let m = extract(dense, perm, b.row_lo, b.rows, b.col_lo, b.cols);
            match b.kind {
                BlockKind::Admissible => {
                    svds.push(Some(low_rank_svd(&m, SVD_REL_TOL, max_rank + 1)?));
                    small.push(None);
                }
                BlockKind::Small => {
                    svds.push(None);
                    small.push(Some(m));
                }
            }
        }
        Ok(Self {
            partition: partition.clone(),
            svds,
            dense: small,
        })
    }

    /// `max_b σ_{r+1}(A⁻¹|_b)` over admissible blocks.
    pub fn max_tail(&self, r: usize) -> f64 {
        self.svds
            .iter()
            .flatten()
            .map(|s| s.singular_value(r))
            .fold(0.0, f64::max)
    }

    pub fn truncate(&self, r: usize) -> HMatrix {
        let payloads = self
            .svds
            .iter()
            .zip(&self.dense)
            .map(|(s, d)| match (s, d) {
                (Some(s), _) => BlockPayload::LowRank(s.truncate(r)),
                (None, Some(d)) => BlockPayload::Dense(d.clone()),
                (None, None) => unreachable!("every block has a payload"),
            })
            .collect();
        HMatrix::from_parts(self.partition.clone(), payloads, r)
    }

    /// `(depth + 1) · max σ_{r+1}`, the number of tree levels times the
    /// largest discarded singular value.
    pub fn bound(&self, r: usize) -> f64 {
        (self.partition.depth() + 1) as f64 * self.max_tail(r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorEntry {
    pub r: usize,
    pub bound: f64,
    /// Largest discarded singular value over admissible blocks.
    pub max_block_error: f64,
    pub spectral_error: Option<f64>,
    pub memory_units: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub entries: Vec<ErrorEntry>,
    pub depth: usize,
}

impl ErrorReport {
    pub fn ranks(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.r).collect()
    }

    pub fn bounds(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.bound).collect()
    }

    /// `r,bound,spectral_error,memory_units`; a missing spectral error is
    /// written as `NaN`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,bound,spectral_error,memory_units\n");
        for e in &self.entries {
            s.push_str(&format!(
                "{},{:.17e},{:.17e},{}\n",
                e.r,
                e.bound,
                e.spectral_error.unwrap_or(f64::NAN),
                e.memory_units
            ));
        }
        s
    }
}

/// Compresses `dense` (original dof order) at rank `r`.
pub fn compress(
    dense: &DenseMatrix,
    partition: &BlockPartition,
    r: usize,
) -> Result<(HMatrix, ErrorReport), HMatrixError> {
    let svds = BlockSvds::new(dense, partition, r)?;
    let h = svds.truncate(r);
    let entry = ErrorEntry {
        r,
        bound: svds.bound(r),
        max_block_error: svds.max_tail(r),
        spectral_error: None,
        memory_units: h.memory_units(),
    };
    Ok((
        h,
        ErrorReport {
            entries: vec![entry],
            depth: partition.depth(),
        },
    ))
}

/// Error report over a range of ranks, sharing the block SVDs. The exact
/// spectral error is computed when `with_spectral` is set.
pub fn error_sweep(
    dense: &DenseMatrix,
    partition: &BlockPartition,
    ranks: &[usize],
    with_spectral: bool,
) -> Result<ErrorReport, HMatrixError> {
    let max_rank = ranks.iter().copied().max().ok_or(HMatrixError::Empty)?;
    let svds = BlockSvds::new(dense, partition, max_rank)?;
    let mut entries = Vec::with_capacity(ranks.len());
    for &r in ranks {
        let h = svds.truncate(r);
        let spectral_error = if with_spectral {
            Some(spectral_error(dense, &h)?.value)
        } else {
            None
        };
        entries.push(ErrorEntry {
            r,
            bound: svds.bound(r),
            max_block_error: svds.max_tail(r),
            spectral_error,
            memory_units: h.memory_units(),
        });
    }
    Ok(ErrorReport {
        entries,
        depth: partition.depth(),
    })
}

/// `‖A⁻¹ − H‖₂` by power iteration.
pub fn spectral_error(a_inv: &DenseMatrix, h: &HMatrix) -> Result<SpectralEstimate, HMatrixError> {
    let e = a_inv.sub(&h.to_dense())?;
    Ok(spectral_norm(&e, POWER_MAX_ITER, POWER_REL_TOL))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Slope of `ln(error)` against `r`.
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub samples_used: usize,
}

/// Relative floor below which samples are treated as round-off.
pub const DECAY_FLOOR: f64 = 1e-13;

/// Least-squares fit of `ln(error) = intercept + rate · r`, dropping samples
/// at or below `DECAY_FLOOR` times the error at the smallest rank.
pub fn fit_decay_series(ranks: &[usize], errors: &[f64]) -> Result<DecayFit, HMatrixError> {
    if ranks.len() != errors.len() {
        return Err(HMatrixError::DimensionMismatch {
            expected: ranks.len(),
            got: errors.len(),
        });
    }
    if ranks.len() < 4 {
        return Err(HMatrixError::TooFewSamples(ranks.len()));
    }
    let first = ranks
        .iter()
        .zip(errors)
        .min_by_key(|(r, _)| **r)
        .map(|(_, e)| *e)
        .expect("nonempty");
    let floor = DECAY_FLOOR * first;
    let pts: Vec<(f64, f64)> = ranks
        .iter()
        .zip(errors)
        .filter(|(_, &e)| e > floor && e > 0.0 && e.is_finite())
        .map(|(&r, &e)| (r as f64, e.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(HMatrixError::AllAtFloor);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(HMatrixError::AllAtFloor);
    }
    let rate = sxy / sxx;
    let intercept = my - rate * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Ok(DecayFit {
        rate,
        intercept,
        r_squared,
        samples_used: pts.len(),
    })
}

/// Fits the decay of the computable bound.
pub fn fit_decay(report: &ErrorReport) -> Result<DecayFit, HMatrixError> {
    fit_decay_series(&report.ranks(), &report.bounds())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential_decay() {
        let r: Vec<usize> = (1..=8).collect();
        let e: Vec<f64> = r.iter().map(|&r| 3.0 * (-2.5 * r as f64).exp()).collect();
        let f = fit_decay_series(&r, &e).unwrap();
        assert!((f.rate + 2.5).abs() < 1e-9);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-9);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_errors_have_zero_rate() {
        let f = fit_decay_series(&[1, 2, 3, 4], &[0.5; 4]).unwrap();
        assert_eq!(f.rate, 0.0);
    }

    #[test]
    fn floor_samples_are_dropped() {
        let f = fit_decay_series(&[1, 2, 3, 4, 5], &[1.0, 0.1, 0.01, 1e-14, 1e-15]).unwrap();
        assert_eq!(f.samples_used, 3);
        assert!(matches!(
            fit_decay_series(&[1, 2, 3, 4], &[1.0, 0.0, 0.0, 0.0]),
            Err(HMatrixError::AllAtFloor)
        ));
        assert!(matches!(
            fit_decay_series(&[1, 2], &[1.0, 0.5]),
            Err(HMatrixError::TooFewSamples(2))
        ));
    }
}
