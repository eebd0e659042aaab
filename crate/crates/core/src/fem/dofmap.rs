use crate::geometry::BBox;
use crate::mesh::Mesh;

use super::basis::{ElementBasis, LocalEntity, LOCAL_EDGES};

/// Mesh entity a global dof is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Carrier {
    Vertex(usize),
    /// Sorted global vertex ids.
    Edge(usize, usize),
    Element(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DofInfo {
    /// Global dof number (boundary dofs included).
    pub global: usize,
    pub carrier: Carrier,
    /// First element containing the carrier.
    pub char_element: usize,
    /// Bounding box of all elements touching the carrier.
    pub support: BBox,
    pub on_boundary: bool,
}

/// Global numbering of the conforming degree-`p` Bernstein space. Global dofs
/// are vertices first, then `p − 1` per edge in sorted edge order, then
/// element interiors. On the edge `(lo, hi)` the dof `k` carries the exponent
/// `k` on `λ_lo`, which glues neighbouring elements continuously.
#[derive(Debug, Clone)]
pub struct DofMap {
    p: usize,
    dofs: Vec<DofInfo>,
    element_dofs: Vec<Vec<usize>>,
    interior_index: Vec<Option<usize>>,
    interior: Vec<usize>,
}

impl DofMap {
    pub fn new(mesh: &Mesh, p: usize) -> Self {
        assert!(p >= 1);
        let basis = ElementBasis::new(p);
        let edges = mesh.sorted_edges();
        let vertex_elements = mesh.vertex_elements();
        let nv = mesh.num_vertices();
        let per_edge = p - 1;
        let per_cell = if p >= 3 { (p - 1) * (p - 2) / 2 } else { 0 };
        let edge_base = nv;
        let cell_base = nv + edges.len() * per_edge;
        let total = cell_base + mesh.num_elements() * per_cell;

        let element_box =
            |e: usize| BBox::from_points(mesh.element_coords(e).iter()).expect("three points");
        let boxes = |els: &[usize]| {
            els.iter()
                .map(|&e| element_box(e))
                .reduce(|a, b| a.union(&b))
                .expect("carrier touches an element")
        };

        let mut dofs = Vec::with_capacity(total);
        for (v, vert) in mesh.vertices().iter().enumerate() {
            let els = &vertex_elements[v];
            dofs.push(DofInfo {
                global: v,
                carrier: Carrier::Vertex(v),
                char_element: els[0],
                support: boxes(els),
                on_boundary: vert.on_boundary,
            });
        }
        let mut edge_index = std::collections::HashMap::with_capacity(edges.len());
        for (i, ((a, b), els)) in edges.iter().enumerate() {
            edge_index.insert((*a, *b), i);
            let support = boxes(els);
            for k in 0..per_edge {
                dofs.push(DofInfo {
                    global: edge_base + i * per_edge + k,
                    carrier: Carrier::Edge(*a, *b),
                    char_element: els[0],
                    support,
                    on_boundary: els.len() == 1,
                });
            }
        }
        for e in 0..mesh.num_elements() {
            let support = element_box(e);
            for k in 0..per_cell {
                dofs.push(DofInfo {
                    global: cell_base + e * per_cell + k,
                    carrier: Carrier::Element(e),
                    char_element: e,
                    support,
                    on_boundary: false,
                });
            }
        }
        debug_assert_eq!(dofs.len(), total);

        let element_dofs = mesh
            .elements()
            .iter()
            .enumerate()
            .map(|(e, el)| {
                let ids = el.vertex_ids;
                let mut interior_seen = 0;
                (0..basis.len())
                    .map(|l| match basis.entity(l) {
                        LocalEntity::Vertex(i) => ids[i],
                        LocalEntity::Edge(k) => {
                            let (i, j) = LOCAL_EDGES[k];
                            let key = (ids[i].min(ids[j]), ids[i].max(ids[j]));
                            let lo_local = if ids[i] < ids[j] { i } else { j };
                            let exp_lo = basis.gamma(l)[lo_local];
                            edge_base + edge_index[&key] * per_edge + (exp_lo - 1)
                        }
                        LocalEntity::Interior => {
                            interior_seen += 1;
                            cell_base + e * per_cell + interior_seen - 1
                        }
                    })
                    .collect()
            })
            .collect();

        let mut interior_index = vec![None; total];
        let mut interior = Vec::new();
        for d in &dofs {
            if !d.on_boundary {
                interior_index[d.global] = Some(interior.len());
                interior.push(d.global);
            }
        }
        Self {
            p,
            dofs,
            element_dofs,
            interior_index,
            interior,
        }
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    /// Number of interior dofs `N`.
    pub fn len(&self) -> usize {
        self.interior.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interior.is_empty()
    }

    pub fn num_global(&self) -> usize {
        self.dofs.len()
    }

    pub fn global(&self, g: usize) -> &DofInfo {
        &self.dofs[g]
    }

    /// Info for interior dof `n` (`0 ≤ n < N`).
    pub fn interior(&self, n: usize) -> &DofInfo {
        &self.dofs[self.interior[n]]
    }

    pub fn interior_dofs(&self) -> impl Iterator<Item = &DofInfo> {
        self.interior.iter().map(|&g| &self.dofs[g])
    }

    pub fn interior_index(&self, g: usize) -> Option<usize> {
        self.interior_index[g]
    }

    /// Global dof ids of element `e` in local basis order.
    pub fn element_dofs(&self, e: usize) -> &[usize] {
        &self.element_dofs[e]
    }

    /// Scatters an interior coefficient vector into a global one (zero on the boundary).
    pub fn extend(&self, u: &[f64]) -> Vec<f64> {
        assert_eq!(u.len(), self.len());
        let mut g = vec![0.0; self.num_global()];
        for (&gi, &v) in self.interior.iter().zip(u) {
            g[gi] = v;
        }
        g
    }
}
