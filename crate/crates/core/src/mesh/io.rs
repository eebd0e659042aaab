//! Plain-text mesh format:
//!
//! ```text
//! nv ne
//! x y b        (nv lines, b = boundary flag 0/1)
//! v0 v1 v2     (ne lines, 0-based)
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{Mesh, MeshError};

pub fn export_mesh(mesh: &Mesh, path: &Path) -> Result<(), MeshError> {
    if path.as_os_str().is_empty() {
        return Err(MeshError::EmptyPath);
    }
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{} {}", mesh.num_vertices(), mesh.num_elements())?;
    for v in mesh.vertices() {
        writeln!(
            w,
            "{:.16e} {:.16e} {}",
            v.coords[0],
            v.coords[1],
            u8::from(v.on_boundary)
        )?;
    }
    for e in mesh.elements() {
        let [a, b, c] = e.vertex_ids;
        writeln!(w, "{a} {b} {c}")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a mesh written by [`export_mesh`]. Boundary flags are recomputed
/// from the connectivity and must agree with the file.
pub fn import_mesh(path: &Path) -> Result<Mesh, MeshError> {
    if path.as_os_str().is_empty() {
        return Err(MeshError::EmptyPath);
    }
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(s) if s.trim().is_empty() => None,
        other => Some((i + 1, other)),
    });
    let mut next = |what: &str| -> Result<(usize, Vec<String>), MeshError> {
        match lines.next() {
            Some((n, Ok(s))) => Ok((n, s.split_whitespace().map(str::to_owned).collect())),
            Some((_, Err(e))) => Err(e.into()),
            None => Err(MeshError::Parse {
                line: 0,
                msg: format!("unexpected end of file, expected {what}"),
            }),
        }
    };
    let bad = |line: usize, msg: String| MeshError::Parse { line, msg };

    let (n, header) = next("header")?;
    if header.len() != 2 {
        return Err(bad(n, "header must be `nv ne`".into()));
    }
    let nv: usize = header[0].parse().map_err(|e| bad(n, format!("{e}")))?;
    let ne: usize = header[1].parse().map_err(|e| bad(n, format!("{e}")))?;

    let mut coords = Vec::with_capacity(nv);
    let mut flags = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (n, f) = next("vertex")?;
        if f.len() != 3 {
            return Err(bad(n, "vertex line must be `x y b`".into()));
        }
        let x: f64 = f[0].parse().map_err(|e| bad(n, format!("{e}")))?;
        let y: f64 = f[1].parse().map_err(|e| bad(n, format!("{e}")))?;
        let b = match f[2].as_str() {
            "0" => false,
            "1" => true,
            other => return Err(bad(n, format!("boundary flag {other:?}"))),
        };
        coords.push([x, y]);
        flags.push((n, b));
    }
    let mut tris = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (n, f) = next("element")?;
        if f.len() != 3 {
            return Err(bad(n, "element line must be `v0 v1 v2`".into()));
        }
        let mut t = [0usize; 3];
        for (slot, s) in t.iter_mut().zip(&f) {
            *slot = s.parse().map_err(|e| bad(n, format!("{e}")))?;
        }
        tris.push(t);
    }
    let mesh = Mesh::new(coords, tris)?;
    for (v, (n, b)) in mesh.vertices().iter().zip(flags) {
        if v.on_boundary != b {
            return Err(bad(
                n,
                "boundary flag disagrees with the connectivity".into(),
            ));
        }
    }
    Ok(mesh)
}
