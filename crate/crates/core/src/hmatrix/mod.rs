//! Cluster trees, admissible block partitions and blockwise truncated-SVD
//! compression of dense inverse matrices into the H-matrix format.

mod cluster;
mod compress;
mod dump;
mod partition;

use thiserror::Error;

use crate::fem::DofMap;
use crate::geometry::BBox;
use crate::linalg::LinalgError;

pub use cluster::{build_cluster_tree, ClusterNode, ClusterTree};
pub use compress::{
    compress, error_sweep, fit_decay, fit_decay_series, spectral_error, BlockPayload, BlockSvds,
    DecayFit, ErrorEntry, ErrorReport, HMatrix, DECAY_FLOOR, POWER_MAX_ITER, POWER_REL_TOL,
};
pub use dump::{read_hmatrix, write_hmatrix, HMAT_VERSION};
pub use partition::{build_block_partition, is_admissible, Block, BlockKind, BlockPartition};

pub const DEFAULT_C_ADM: f64 = 2.0;

#[derive(Debug, Error)]
pub enum HMatrixError {
    #[error("no degrees of freedom")]
    Empty,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid block partition: {0}")]
    InvalidPartition(String),
    #[error("decay fit needs at least 4 samples, got {0}")]
    TooFewSamples(usize),
    #[error("all error samples are at the floating-point floor")]
    AllAtFloor,
    #[error("output path is empty")]
    EmptyPath,
    #[error("bad H-matrix dump: {0}")]
    BadDump(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// `max(32, binom(p + 2, 2))`
pub fn default_c_small(p: usize) -> usize {
    ((p + 1) * (p + 2) / 2).max(32)
}

/// Support boxes of the interior dofs, in system order.
pub fn dof_boxes(dofmap: &DofMap) -> Vec<BBox> {
    dofmap.interior_dofs().map(|d| d.support).collect()
}
