use crate::geometry::BBox;

use super::cluster::ClusterTree;
use super::HMatrixError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockKind {
    Admissible,
    Small,
}

/// Block `I × J` of permuted indices `[row_lo, row_lo + rows) × [col_lo, col_lo + cols)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub row_lo: usize,
    pub rows: usize,
    pub col_lo: usize,
    pub cols: usize,
    pub kind: BlockKind,
    pub row_box: BBox,
    pub col_box: BBox,
}

impl Block {
    pub fn contains(&self, i: usize, j: usize) -> bool {
        (self.row_lo..self.row_lo + self.rows).contains(&i)
            && (self.col_lo..self.col_lo + self.cols).contains(&j)
    }
}

/// `diam(B_I) ≤ c_adm · dist(B_I, B_J)` with `dist > 0`.
pub fn is_admissible(row_box: &BBox, col_box: &BBox, c_adm: f64) -> bool {
    let dist = row_box.dist(col_box);
    dist > 0.0 && row_box.diam() <= c_adm * dist
}

#[derive(Debug, Clone)]
pub struct BlockPartition {
    pub(crate) n: usize,
    pub(crate) blocks: Vec<Block>,
    pub(crate) perm: Vec<usize>,
    pub(crate) depth: usize,
    pub(crate) c_small: usize,
    pub(crate) c_adm: f64,
}

impl BlockPartition {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// `perm[k]` = original index of permuted position `k`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Depth of the cluster tree the partition was built from.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn c_small(&self) -> usize {
        self.c_small
    }

    pub fn c_adm(&self) -> f64 {
        self.c_adm
    }

    pub fn count(&self, kind: BlockKind) -> usize {
        self.blocks.iter().filter(|b| b.kind == kind).count()
    }

    /// Largest number of blocks sharing one row cluster or one column cluster.
    pub fn sparsity_constant(&self) -> usize {
        use std::collections::HashMap;
        let mut rows: HashMap<(usize, usize), usize> = HashMap::new();
        let mut cols: HashMap<(usize, usize), usize> = HashMap::new();
        for b in &self.blocks {
            *rows.entry((b.row_lo, b.rows)).or_default() += 1;
            *cols.entry((b.col_lo, b.cols)).or_default() += 1;
        }
        rows.values()
            .chain(cols.values())
            .copied()
            .max()
            .unwrap_or(0)
    }

    /// Index of the block containing permuted entry `(i, j)`.
    pub fn locate(&self, i: usize, j: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(i, j))
    }

    /// Checks that the blocks tile `{0..N}²` exactly, that small blocks are
    /// thin and that admissible blocks satisfy the admissibility condition.
    pub fn verify(&self) -> Result<(), HMatrixError> {
        let n = self.n;
        let area: u128 = self.blocks.iter().map(|b| (b.rows * b.cols) as u128).sum();
        if area != (n as u128) * (n as u128) {
            return Err(HMatrixError::InvalidPartition(format!(
                "blocks cover {area} entries, expected {}",
                n * n
            )));
        }
        // split rows at every block boundary and check each strip is tiled in columns
        let mut cuts: Vec<usize> = self
            .blocks
            .iter()
            .flat_map(|b| [b.row_lo, b.row_lo + b.rows])
            .collect();
        cuts.sort_unstable();
        cuts.dedup();
        let mut by_row: Vec<&Block> = self.blocks.iter().collect();
        by_row.sort_by_key(|b| b.row_lo);
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let mut spans: Vec<(usize, usize)> = by_row
                .iter()
                .take_while(|b| b.row_lo < hi)
                .filter(|b| b.row_lo <= lo && b.row_lo + b.rows >= hi)
                .map(|b| (b.col_lo, b.col_lo + b.cols))
                .collect();
            spans.sort_unstable();
            let mut at = 0;
            for (a, b) in spans {
                if a != at {
                    return Err(HMatrixError::InvalidPartition(format!(
                        "rows {lo}..{hi}: gap or overlap at column {at}"
                    )));
                }
                at = b;
            }
            if at != n {
                return Err(HMatrixError::InvalidPartition(format!(
                    "rows {lo}..{hi} end at column {at}"
                )));
            }
        }
        for b in &self.blocks {
            match b.kind {
                BlockKind::Small if b.rows.min(b.cols) > self.c_small => {
                    return Err(HMatrixError::InvalidPartition(format!(
                        "small block {}×{} exceeds C_small = {}",
                        b.rows, b.cols, self.c_small
                    )))
                }
                BlockKind::Admissible if !is_admissible(&b.row_box, &b.col_box, self.c_adm) => {
                    return Err(HMatrixError::InvalidPartition(format!(
                        "block at ({}, {}) is not admissible",
                        b.row_lo, b.col_lo
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Standard recursive descent: admissible pairs become admissible blocks,
/// pairs involving a leaf become small blocks, everything else recurses into
/// the four child pairs.
pub fn build_block_partition(
    tree: &ClusterTree,
    c_adm: f64,
) -> Result<BlockPartition, HMatrixError> {
    if !(c_adm > 0.0 && c_adm.is_finite()) {
        return Err(HMatrixError::InvalidParameter(format!("C_adm = {c_adm}")));
    }
    let mut blocks = Vec::new();
    let mut stack = vec![(0usize, 0usize)];
    while let Some((s, t)) = stack.pop() {
        let (a, b) = (tree.node(s), tree.node(t));
        let kind = if is_admissible(&a.bbox, &b.bbox, c_adm) {
            Some(BlockKind::Admissible)
        } else if a.is_leaf() || b.is_leaf() {
            Some(BlockKind::Small)
        } else {
            None
        };
        match (kind, a.children, b.children) {
            (Some(kind), _, _) => blocks.push(Block {
                row_lo: a.lo,
                rows: a.len,
                col_lo: b.lo,
                cols: b.len,
                kind,
                row_box: a.bbox,
                col_box: b.bbox,
            }),
            (None, Some([a0, a1]), Some([b0, b1])) => {
                // reversed so blocks come out in row-major tree order
                stack.extend([(a1, b1), (a1, b0), (a0, b1), (a0, b0)]);
            }
            _ => unreachable!("non-leaf clusters have two children"),
        }
    }
    Ok(BlockPartition {
        n: tree.len(),
        blocks,
        perm: tree.perm().to_vec(),
        depth: tree.depth(),
        c_small: tree.c_small(),
        c_adm,
    })
}
