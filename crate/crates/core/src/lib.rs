//! Graded triangular meshes of the unit square, conforming Bernstein finite
//! elements, polynomial lifting and degree-reduction operators on simplices,
//! and hierarchical-matrix compression of inverse FEM matrices.

pub mod fem;
pub mod geometry;
pub mod hmatrix;
pub mod linalg;
pub mod mesh;
pub mod polyops;
pub mod quadrature;
