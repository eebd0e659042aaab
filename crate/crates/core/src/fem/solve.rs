use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::linalg::{DenseMatrix, LinalgError, LuFactors, MAX_DENSE_INVERSE_DIM};
use crate::mesh::Mesh;

use super::assembly::{assemble_load_with, assemble_stiffness, map_point, Tabulation};
use super::basis::ElementBasis;
use super::{Coefficients, DofMap, FemError, SparseMatrix};

pub const HGRD_VERSION: u32 = 1;
const HGRD_MAGIC: &[u8; 4] = b"HGRD";

/// `A⁻¹` by dense LU with partial pivoting.
pub fn solve_dense_inverse(a: &SparseMatrix) -> Result<DenseMatrix, FemError> {
    let n = a.dim();
    if n == 0 {
        return Err(FemError::EmptySystem);
    }
    if n > MAX_DENSE_INVERSE_DIM {
        return Err(LinalgError::TooLarge {
            n,
            max: MAX_DENSE_INVERSE_DIM,
        }
        .into());
    }
    Ok(LuFactors::factor(&a.to_dense())?.inverse()?)
}

#[derive(Debug, Clone)]
pub struct FemSolution {
    /// Coefficients of the interior dofs.
    pub coeffs: Vec<f64>,
    pub dofmap: DofMap,
    pub l2_error: Option<f64>,
}

/// Galerkin solution in the degree-`p` space with zero boundary values.
/// With a reference solution the L2 error is computed as well.
pub fn fem_solve(
    mesh: &Mesh,
    coeffs: &Coefficients,
    f: &dyn Fn([f64; 2]) -> f64,
    p: usize,
    reference: Option<&dyn Fn([f64; 2]) -> f64>,
) -> Result<FemSolution, FemError> {
    let (a, dofmap) = assemble_stiffness(mesh, coeffs, p)?;
    if dofmap.is_empty() {
        return Err(FemError::EmptySystem);
    }
    let b = assemble_load_with(mesh, &dofmap, f)?;
    let u = LuFactors::factor(&a.to_dense())?.solve(&b)?;
    let l2_error = reference
        .map(|r| l2_error(mesh, &dofmap, &u, r))
        .transpose()?;
    Ok(FemSolution {
        coeffs: u,
        dofmap,
        l2_error,
    })
}

/// `‖u_h − u‖_{L²(Ω)}` for interior coefficients `u`.
pub fn l2_error(
    mesh: &Mesh,
    dm: &DofMap,
    u: &[f64],
    exact: &dyn Fn([f64; 2]) -> f64,
) -> Result<f64, FemError> {
    if u.len() != dm.len() {
        return Err(FemError::LengthMismatch {
            expected: dm.len(),
            got: u.len(),
        });
    }
    let g = dm.extend(u);
    let p = dm.degree();
    let tab = Tabulation::new(&ElementBasis::new(p), 2 * p + 6)?;
    let mut sum = 0.0;
    for e in 0..mesh.num_elements() {
        let (v0, b) = mesh.element_map(e);
        let det = (b[0][0] * b[1][1] - b[0][1] * b[1][0]).abs();
        let dofs = dm.element_dofs(e);
        for q in 0..tab.points.len() {
            let uh: f64 = dofs
                .iter()
                .zip(&tab.values[q])
                .map(|(&d, v)| g[d] * v)
                .sum();
            let diff = uh - exact(map_point(v0, &b, tab.points[q]));
            sum += tab.weights[q] * det * diff * diff;
        }
    }
    Ok(sum.max(0.0).sqrt())
}

/// Raw row-major binary: `HGRD`, version, rows, cols (u32 LE), then f64 LE.
pub fn write_hgrd(m: &DenseMatrix, path: &Path) -> Result<(), FemError> {
    if path.as_os_str().is_empty() {
        return Err(FemError::EmptyPath);
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(HGRD_MAGIC)?;
    for v in [HGRD_VERSION, m.rows() as u32, m.cols() as u32] {
        w.write_all(&v.to_le_bytes())?;
    }
    for x in m.as_slice() {
        w.write_all(&x.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_hgrd(path: &Path) -> Result<DenseMatrix, FemError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut head = [0u8; 16];
    r.read_exact(&mut head)
        .map_err(|_| FemError::BadHeader("file shorter than the header".into()))?;
    if &head[..4] != HGRD_MAGIC {
        return Err(FemError::BadHeader("missing HGRD magic".into()));
    }
    let word = |k: usize| u32::from_le_bytes(head[4 * k..4 * k + 4].try_into().expect("4 bytes"));
    if word(1) != HGRD_VERSION {
        return Err(FemError::BadHeader(format!(
            "unsupported version {}",
            word(1)
        )));
    }
    let (rows, cols) = (word(2) as usize, word(3) as usize);
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != rows * cols * 8 {
        return Err(FemError::BadHeader(format!(
            "expected {} data bytes, found {}",
            rows * cols * 8,
            bytes.len()
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(DenseMatrix::from_row_major(rows, cols, data)?)
}
