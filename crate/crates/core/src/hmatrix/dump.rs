//! Binary H-matrix dump, all integers `u64` and all reals `f64`, little endian:
//!
//! ```text
//! "HMAT" u32:version
//! N depth c_small n_blocks   c_adm   perm[N]
//! per block: I_lo I_len J_lo J_len kind r   row_box[4] col_box[4]   payload
//! ```
//!
//! `kind` is 0 for admissible blocks (payload `X` then `Y`, both row-major
//! with `r` columns) and 1 for small blocks (payload the dense `|I|×|J|`
//! block, `r = 0`).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::geometry::BBox;
use crate::linalg::{DenseMatrix, LowRankFactor};

use super::compress::{BlockPayload, HMatrix};
use super::partition::{Block, BlockKind, BlockPartition};
use super::HMatrixError;

const MAGIC: &[u8; 4] = b"HMAT";
pub const HMAT_VERSION: u32 = 1;

pub fn write_hmatrix(h: &HMatrix, path: &Path) -> Result<(), HMatrixError> {
    if path.as_os_str().is_empty() {
        return Err(HMatrixError::EmptyPath);
    }
    let mut w = BufWriter::new(File::create(path)?);
    let p = h.partition();
    w.write_all(MAGIC)?;
    w.write_all(&HMAT_VERSION.to_le_bytes())?;
    let u = |w: &mut BufWriter<File>, v: usize| w.write_all(&(v as u64).to_le_bytes());
    let f = |w: &mut BufWriter<File>, v: f64| w.write_all(&v.to_le_bytes());
    u(&mut w, p.dim())?;
    u(&mut w, p.depth())?;
    u(&mut w, p.c_small())?;
    u(&mut w, p.blocks().len())?;
    f(&mut w, p.c_adm())?;
    for &i in p.perm() {
        u(&mut w, i)?;
    }
    for (b, payload) in p.blocks().iter().zip(h.payloads()) {
        let (kind, r) = match payload {
            BlockPayload::LowRank(fac) => (0, fac.rank()),
            BlockPayload::Dense(_) => (1, 0),
        };
        for v in [b.row_lo, b.rows, b.col_lo, b.cols, kind, r] {
            u(&mut w, v)?;
        }
        for v in [b.row_box.lo, b.row_box.hi, b.col_box.lo, b.col_box.hi]
            .iter()
            .flatten()
        {
            f(&mut w, *v)?;
        }
        let data: Vec<&[f64]> = match payload {
            BlockPayload::LowRank(fac) => vec![fac.x.as_slice(), fac.y.as_slice()],
            BlockPayload::Dense(d) => vec![d.as_slice()],
        };
        for v in data.into_iter().flatten() {
            f(&mut w, *v)?;
        }
    }
    w.flush()?;
    Ok(())
}

struct Reader<R: Read>(R);

impl<R: Read> Reader<R> {
    fn bytes<const K: usize>(&mut self) -> Result<[u8; K], HMatrixError> {
        let mut b = [0u8; K];
        self.0
            .read_exact(&mut b)
            .map_err(|_| HMatrixError::BadDump("unexpected end of file".into()))?;
        Ok(b)
    }

    fn u64(&mut self) -> Result<usize, HMatrixError> {
        Ok(u64::from_le_bytes(self.bytes()?) as usize)
    }

    fn f64(&mut self) -> Result<f64, HMatrixError> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<DenseMatrix, HMatrixError> {
        let data = (0..rows * cols)
            .map(|_| self.f64())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DenseMatrix::from_row_major(rows, cols, data)?)
    }

    fn bbox(&mut self) -> Result<BBox, HMatrixError> {
        let v = [self.f64()?, self.f64()?, self.f64()?, self.f64()?];
        Ok(BBox {
            lo: [v[0], v[1]],
            hi: [v[2], v[3]],
        })
    }
}

pub fn read_hmatrix(path: &Path) -> Result<HMatrix, HMatrixError> {
    let mut r = Reader(BufReader::new(File::open(path)?));
    if &r.bytes::<4>()? != MAGIC {
        return Err(HMatrixError::BadDump("missing HMAT magic".into()));
    }
    let version = u32::from_le_bytes(r.bytes()?);
    if version != HMAT_VERSION {
        return Err(HMatrixError::BadDump(format!(
            "unsupported version {version}"
        )));
    }
    let (n, depth, c_small, nb) = (r.u64()?, r.u64()?, r.u64()?, r.u64()?);
    let c_adm = r.f64()?;
    let perm = (0..n).map(|_| r.u64()).collect::<Result<Vec<_>, _>>()?;
    let mut blocks = Vec::with_capacity(nb);
    let mut payloads = Vec::with_capacity(nb);
    let mut rank = 0;
    for _ in 0..nb {
        let (row_lo, rows, col_lo, cols, kind, k) =
            (r.u64()?, r.u64()?, r.u64()?, r.u64()?, r.u64()?, r.u64()?);
        if row_lo + rows > n || col_lo + cols > n {
            return Err(HMatrixError::BadDump(format!(
                "block at ({row_lo}, {col_lo}) leaves the matrix"
            )));
        }
        let (row_box, col_box) = (r.bbox()?, r.bbox()?);
        let (kind, payload) = match kind {
            0 => {
                let x = r.matrix(rows, k)?;
                let y = r.matrix(cols, k)?;
                rank = rank.max(k);
                (
                    BlockKind::Admissible,
                    BlockPayload::LowRank(LowRankFactor { x, y }),
                )
            }
            1 => (BlockKind::Small, BlockPayload::Dense(r.matrix(rows, cols)?)),
            other => return Err(HMatrixError::BadDump(format!("unknown block kind {other}"))),
        };
        blocks.push(Block {
            row_lo,
            rows,
            col_lo,
            cols,
            kind,
            row_box,
            col_box,
        });
        payloads.push(payload);
    }
    let mut extra = [0u8; 1];
    if r.0.read(&mut extra)? != 0 {
        return Err(HMatrixError::BadDump("trailing bytes".into()));
    }
    let partition = BlockPartition {
        n,
        blocks,
        perm,
        depth,
        c_small,
        c_adm,
    };
    Ok(HMatrix::from_parts(partition, payloads, rank))
}
