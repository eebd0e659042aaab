//! Conforming triangulations of the unit square graded toward one edge.

mod generate;
mod io;

pub use generate::{
    make_graded_mesh, Alpha, GradingSpec, TargetEdge, Termination, MAX_STRIP_CELLS, MIN_LAYER_WIDTH,
};
pub use io::{export_mesh, import_mesh};

use std::collections::HashMap;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("invalid grading: {0}")]
    InvalidSpec(String),
    #[error("layer width {width:e} is below the representable limit")]
    TooFine { width: f64 },
    #[error("a strip would need {cells} cells (limit {max})")]
    TooManyCells { cells: usize, max: usize },
    #[error("element {element} references vertex {vertex}, but there are only {count} vertices")]
    VertexOutOfRange {
        element: usize,
        vertex: usize,
        count: usize,
    },
    #[error("element {element} repeats a vertex")]
    RepeatedVertex { element: usize },
    #[error("element {element} is not positively oriented (twice area {twice_area:e})")]
    Orientation { element: usize, twice_area: f64 },
    #[error("edge ({0}, {1}) is shared by more than two elements")]
    NonManifoldEdge(usize, usize),
    #[error("edge ({0}, {1}) has a single element but is not on the unit-square boundary")]
    InteriorBoundaryEdge(usize, usize),
    #[error("vertex {0} lies outside the unit square")]
    OutsideDomain(usize),
    #[error("element areas sum to {0}, not 1")]
    AreaMismatch(f64),
    #[error("element id {id} out of range ({count} elements)")]
    ElementOutOfRange { id: usize, count: usize },
    #[error("empty output path")]
    EmptyPath,
    #[error("mesh file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    pub coords: [f64; 2],
    pub on_boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub vertex_ids: [usize; 3],
    pub twice_area: f64,
}

/// Validated triangulation. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Vertex>,
    elements: Vec<Element>,
    grading: Option<GradingSpec>,
    layer_abscissae: Vec<f64>,
}

fn twice_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh {
    /// Checks ids, orientation and that no edge has more than two elements;
    /// vertices on single-element edges are flagged as boundary vertices.
    pub fn new(coords: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let nv = coords.len();
        let mut elements = Vec::with_capacity(triangles.len());
        for (e, t) in triangles.iter().enumerate() {
            for &v in t {
                if v >= nv {
                    return Err(MeshError::VertexOutOfRange {
                        element: e,
                        vertex: v,
                        count: nv,
                    });
                }
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(MeshError::RepeatedVertex { element: e });
            }
            let a2 = twice_area(coords[t[0]], coords[t[1]], coords[t[2]]);
            if !(a2 > 0.0) {
                return Err(MeshError::Orientation {
                    element: e,
                    twice_area: a2,
                });
            }
            elements.push(Element {
                vertex_ids: *t,
                twice_area: a2,
            });
        }
        let mut mesh = Mesh {
            vertices: coords
                .into_iter()
                .map(|c| Vertex {
                    coords: c,
                    on_boundary: false,
                })
                .collect(),
            elements,
            grading: None,
            layer_abscissae: Vec::new(),
        };
        let edges = mesh.edge_elements();
        for (&(a, b), els) in &edges {
            if els.len() > 2 {
                return Err(MeshError::NonManifoldEdge(a, b));
            }
        }
        for (&(a, b), els) in &edges {
            if els.len() == 1 {
                mesh.vertices[a].on_boundary = true;
                mesh.vertices[b].on_boundary = true;
            }
        }
        Ok(mesh)
    }

    /// Additional checks for a triangulation of `[0,1]²`: vertices inside the
    /// square, every boundary edge on `∂Ω`, total area 1.
    pub fn validate_unit_square(&self) -> Result<(), MeshError> {
        const TOL: f64 = 1e-14;
        for (i, v) in self.vertices.iter().enumerate() {
            let [x, y] = v.coords;
            if !(-TOL..=1.0 + TOL).contains(&x) || !(-TOL..=1.0 + TOL).contains(&y) {
                return Err(MeshError::OutsideDomain(i));
            }
        }
        let on_side = |a: [f64; 2], b: [f64; 2]| {
            (0..2).any(|k| {
                (a[k].abs() <= TOL && b[k].abs() <= TOL)
                    || ((a[k] - 1.0).abs() <= TOL && (b[k] - 1.0).abs() <= TOL)
            })
        };
        for ((a, b), els) in self.edge_elements() {
            if els.len() == 1 && !on_side(self.vertices[a].coords, self.vertices[b].coords) {
                return Err(MeshError::InteriorBoundaryEdge(a, b));
            }
        }
        let area = self.total_area();
        if (area - 1.0).abs() > 1e-12 {
            return Err(MeshError::AreaMismatch(area));
        }
        Ok(())
    }

    pub(crate) fn with_grading(mut self, spec: GradingSpec, layer_abscissae: Vec<f64>) -> Self {
        self.grading = Some(spec);
        self.layer_abscissae = layer_abscissae;
        self
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn grading(&self) -> Option<&GradingSpec> {
        self.grading.as_ref()
    }

    /// Layer abscissae `x_0 < … < x_L` of the grading, measured from the
    /// target edge, before any transition strips were inserted.
    pub fn layer_abscissae(&self) -> &[f64] {
        &self.layer_abscissae
    }

    pub fn element_coords(&self, e: usize) -> [[f64; 2]; 3] {
        let ids = self.elements[e].vertex_ids;
        [
            self.vertices[ids[0]].coords,
            self.vertices[ids[1]].coords,
            self.vertices[ids[2]].coords,
        ]
    }

    /// Affine map `F_T(x̂) = v0 + B x̂` from the reference triangle; returns
    /// `(v0, B)` with `B` stored by rows.
    pub fn element_map(&self, e: usize) -> ([f64; 2], [[f64; 2]; 2]) {
        let [a, b, c] = self.element_coords(e);
        (a, [[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]])
    }

    pub fn element_area(&self, e: usize) -> f64 {
        0.5 * self.elements[e].twice_area
    }

    pub fn total_area(&self) -> f64 {
        self.elements.iter().map(|e| 0.5 * e.twice_area).sum()
    }

    /// Element diameter `h_T`, the longest edge.
    pub fn element_diameter(&self, e: usize) -> f64 {
        let [a, b, c] = self.element_coords(e);
        dist(a, b).max(dist(b, c)).max(dist(a, c))
    }

    pub fn inradius(&self, e: usize) -> f64 {
        let [a, b, c] = self.element_coords(e);
        let perimeter = dist(a, b) + dist(b, c) + dist(a, c);
        self.elements[e].twice_area / perimeter
    }

    /// `h_T / (2 r_T)`
    pub fn shape_ratio(&self, e: usize) -> f64 {
        self.element_diameter(e) / (2.0 * self.inradius(e))
    }

    pub fn max_shape_ratio(&self) -> f64 {
        (0..self.num_elements())
            .map(|e| self.shape_ratio(e))
            .fold(0.0, f64::max)
    }

    pub fn centroid(&self, e: usize) -> [f64; 2] {
        let [a, b, c] = self.element_coords(e);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Map from sorted vertex pairs to the elements containing that edge.
    pub fn edge_elements(&self) -> HashMap<(usize, usize), Vec<usize>> {
        let mut map: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (e, el) in self.elements.iter().enumerate() {
            let [a, b, c] = el.vertex_ids;
            for (u, v) in [(a, b), (b, c), (c, a)] {
                map.entry(edge_key(u, v)).or_default().push(e);
            }
        }
        map
    }

    /// Sorted edge list with its elements, in deterministic order.
    pub fn sorted_edges(&self) -> Vec<((usize, usize), Vec<usize>)> {
        let mut edges: Vec<_> = self.edge_elements().into_iter().collect();
        edges.sort_unstable_by_key(|(k, _)| *k);
        edges
    }

    pub fn vertex_elements(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_vertices()];
        for (e, el) in self.elements.iter().enumerate() {
            for &v in &el.vertex_ids {
                out[v].push(e);
            }
        }
        out
    }
}

/// `(h_min, h_max)` over all elements.
pub fn mesh_widths(mesh: &Mesh) -> (f64, f64) {
    (0..mesh.num_elements())
        .map(|e| mesh.element_diameter(e))
        .fold((f64::INFINITY, 0.0), |(lo, hi), h| (lo.min(h), hi.max(h)))
}

/// Elements whose closure meets the closure of `element_id`, itself included,
/// in ascending order.
pub fn element_patch(mesh: &Mesh, element_id: usize) -> Result<Vec<usize>, MeshError> {
    if element_id >= mesh.num_elements() {
        return Err(MeshError::ElementOutOfRange {
            id: element_id,
            count: mesh.num_elements(),
        });
    }
    let ids = mesh.elements()[element_id].vertex_ids;
    let mut patch: Vec<usize> = mesh
        .elements()
        .iter()
        .enumerate()
        .filter(|(_, el)| el.vertex_ids.iter().any(|v| ids.contains(v)))
        .map(|(e, _)| e)
        .collect();
    patch.sort_unstable();
    Ok(patch)
}

/// `(card T)^{C_card} · h_min²`
pub fn check_cardinality_assumption(mesh: &Mesh, c_card: f64) -> f64 {
    let (h_min, _) = mesh_widths(mesh);
    (mesh.num_elements() as f64).powf(c_card) * h_min * h_min
}

/// Smallest and largest value of `h_T / (dist(x_T, Γ)^{1−1/α} H)` over the
/// mesh, with `x_T` the centroid. `None` for meshes without grading data.
pub fn grading_constants(mesh: &Mesh) -> Option<(f64, f64)> {
    let spec = mesh.grading()?;
    let exponent = match spec.alpha {
        Alpha::Infinite => 1.0,
        Alpha::Finite(a) => 1.0 - 1.0 / a,
    };
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for e in 0..mesh.num_elements() {
        let c = mesh.centroid(e);
        let d = spec.target_edge.distance(c);
        let r = mesh.element_diameter(e) / (d.powf(exponent) * spec.h);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Some((lo, hi))
}
