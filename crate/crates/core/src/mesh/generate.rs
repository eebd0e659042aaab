use std::fmt;

use super::{Mesh, MeshError};

/// Layers thinner than this are rejected.
pub const MIN_LAYER_WIDTH: f64 = 1e-12;
/// Upper bound on the cell count of a single strip.
pub const MAX_STRIP_CELLS: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    Finite(f64),
    Infinite,
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Finite(a) => write!(f, "{a}"),
            Alpha::Infinite => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for Alpha {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") || t == "∞" {
            return Ok(Alpha::Infinite);
        }
        t.parse::<f64>()
            .map(|a| {
                if a.is_infinite() {
                    Alpha::Infinite
                } else {
                    Alpha::Finite(a)
                }
            })
            .map_err(|e| format!("bad alpha {s:?}: {e}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetEdge {
    Left,
    Right,
    Bottom,
    Top,
    None,
}

impl TargetEdge {
    /// Distance from `x` to the edge; 1 when there is no target edge.
    pub fn distance(self, x: [f64; 2]) -> f64 {
        match self {
            TargetEdge::Left => x[0],
            TargetEdge::Right => 1.0 - x[0],
            TargetEdge::Bottom => x[1],
            TargetEdge::Top => 1.0 - x[1],
            TargetEdge::None => 1.0,
        }
    }

    /// Maps a point of the left-graded frame `(u, v)` into the unit square.
    fn place(self, [u, v]: [f64; 2]) -> [f64; 2] {
        match self {
            TargetEdge::Left | TargetEdge::None => [u, v],
            TargetEdge::Right => [1.0 - u, v],
            TargetEdge::Bottom => [v, u],
            TargetEdge::Top => [v, 1.0 - u],
        }
    }

    fn reflects(self) -> bool {
        matches!(self, TargetEdge::Right | TargetEdge::Bottom)
    }
}

impl fmt::Display for TargetEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TargetEdge::Left => "left",
            TargetEdge::Right => "right",
            TargetEdge::Bottom => "bottom",
            TargetEdge::Top => "top",
            TargetEdge::None => "none",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for TargetEdge {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" => Ok(TargetEdge::Left),
            "right" => Ok(TargetEdge::Right),
            "bottom" => Ok(TargetEdge::Bottom),
            "top" => Ok(TargetEdge::Top),
            "none" => Ok(TargetEdge::None),
            other => Err(format!("unknown edge {other:?}")),
        }
    }
}

/// How many layers to generate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Layers(usize),
    /// Fewest layers whose innermost width is `≤ h_floor`.
    HFloor(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradingSpec {
    pub alpha: Alpha,
    /// `H ∈ (0, 1]`
    pub h: f64,
    pub target_edge: TargetEdge,
    /// `None` is allowed for finite `alpha`, where `L = ⌈1/H⌉`.
    pub termination: Option<Termination>,
}

impl GradingSpec {
    pub fn uniform(h: f64) -> Self {
        Self {
            alpha: Alpha::Finite(1.0),
            h,
            target_edge: TargetEdge::None,
            termination: None,
        }
    }

    pub fn exponential(h: f64, edge: TargetEdge, layers: usize) -> Self {
        Self {
            alpha: Alpha::Infinite,
            h,
            target_edge: edge,
            termination: Some(Termination::Layers(layers)),
        }
    }

    pub fn algebraic(alpha: f64, h: f64, edge: TargetEdge) -> Self {
        Self {
            alpha: Alpha::Finite(alpha),
            h,
            target_edge: edge,
            termination: None,
        }
    }

    /// `σ = 1/(1+H)`
    pub fn sigma(&self) -> f64 {
        1.0 / (1.0 + self.h)
    }

    fn validate(&self) -> Result<(), MeshError> {
        if !(self.h > 0.0 && self.h <= 1.0) {
            return Err(MeshError::InvalidSpec(format!(
                "H = {} must lie in (0, 1]",
                self.h
            )));
        }
        if let Alpha::Finite(a) = self.alpha {
            if !(a >= 1.0 && a.is_finite()) {
                return Err(MeshError::InvalidSpec(format!(
                    "alpha = {a} must be at least 1"
                )));
            }
        }
        match self.termination {
            Some(Termination::Layers(0)) => Err(MeshError::InvalidSpec(
                "layer count must be at least 1".into(),
            )),
            Some(Termination::HFloor(h)) if !(h > 0.0) => Err(MeshError::InvalidSpec(format!(
                "h_floor = {h} must be positive"
            ))),
            None if self.alpha == Alpha::Infinite => Err(MeshError::InvalidSpec(
                "exponential grading needs a layer count or h_floor".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Layer abscissae `0 = x_0 < x_1 < … < x_L = 1`, measured from the target edge.
    pub fn layer_abscissae(&self) -> Result<Vec<f64>, MeshError> {
        self.validate()?;
        let xs = match self.alpha {
            Alpha::Infinite => {
                let sigma = self.sigma();
                let l = match self.termination {
                    Some(Termination::Layers(l)) => l,
                    Some(Termination::HFloor(floor)) => {
                        let mut l = 1;
                        while sigma.powi(l as i32 - 1) > floor {
                            l += 1;
                            if sigma.powi(l as i32 - 1) < MIN_LAYER_WIDTH {
                                return Err(MeshError::TooFine {
                                    width: sigma.powi(l as i32 - 1),
                                });
                            }
                        }
                        if l == 1 {
                            log::warn!(
                                "h_floor {floor} leaves no room for a graded layer; using a single uniform layer"
                            );
                        }
                        l
                    }
                    None => unreachable!("validated"),
                };
                let mut xs = vec![0.0];
                xs.extend((1..=l).map(|k| sigma.powi((l - k) as i32)));
                xs
            }
            Alpha::Finite(a) => {
                let l = match self.termination {
                    Some(Termination::Layers(l)) => l,
                    Some(Termination::HFloor(floor)) => {
                        let mut l = 1usize;
                        while (1.0 / l as f64).powf(a) > floor {
                            l += 1;
                            if (1.0 / l as f64).powf(a) < MIN_LAYER_WIDTH {
                                return Err(MeshError::TooFine {
                                    width: (1.0 / l as f64).powf(a),
                                });
                            }
                        }
                        l
                    }
                    None => ((1.0 / self.h) * (1.0 - 1e-12)).ceil().max(1.0) as usize,
                };
                (0..=l)
                    .map(|k| {
                        if k == l {
                            1.0
                        } else {
                            (k as f64 / l as f64).powf(a)
                        }
                    })
                    .collect()
            }
        };
        let min_w = xs
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        if min_w < MIN_LAYER_WIDTH {
            return Err(MeshError::TooFine { width: min_w });
        }
        Ok(xs)
    }
}

/// Cells in a strip of width `w`: the smallest power of two `n` with `1/n ≤ w`.
fn strip_cells(w: f64) -> Result<usize, MeshError> {
    if w < MIN_LAYER_WIDTH {
        return Err(MeshError::TooFine { width: w });
    }
    let n = ((1.0 / w) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let n = n.next_power_of_two();
    if n > MAX_STRIP_CELLS {
        return Err(MeshError::TooManyCells {
            cells: n,
            max: MAX_STRIP_CELLS,
        });
    }
    Ok(n)
}

/// Halves strips until neighbouring cell counts differ by at most a factor 2.
fn balance_strips(mut xs: Vec<f64>) -> Result<(Vec<f64>, Vec<usize>), MeshError> {
    loop {
        let counts = xs
            .windows(2)
            .map(|w| strip_cells(w[1] - w[0]))
            .collect::<Result<Vec<_>, _>>()?;
        let split = counts.windows(2).enumerate().find_map(|(k, c)| {
            if 2 * c[0] < c[1] {
                Some(k)
            } else if 2 * c[1] < c[0] {
                Some(k + 1)
            } else {
                None
            }
        });
        match split {
            None => return Ok((xs, counts)),
            Some(k) => {
                let mid = 0.5 * (xs[k] + xs[k + 1]);
                xs.insert(k + 1, mid);
            }
        }
    }
}

/// Builds the graded triangulation described by `spec`.
///
/// Each strip between consecutive abscissae is one column of square-ish cells.
/// Where the next strip is twice as fine, the shared line carries the extra
/// midpoints and the coarse cells are split into three or four triangles,
/// so no hanging nodes occur.
pub fn make_graded_mesh(spec: &GradingSpec) -> Result<Mesh, MeshError> {
    let layers = spec.layer_abscissae()?;
    let (xs, counts) = balance_strips(layers.clone())?;
    let strips = counts.len();

    // points per vertical line
    let line_pts: Vec<usize> = (0..=strips)
        .map(|k| {
            let left = if k > 0 { counts[k - 1] } else { 0 };
            let right = if k < strips { counts[k] } else { 0 };
            left.max(right) + 1
        })
        .collect();
    let mut offset = Vec::with_capacity(strips + 2);
    offset.push(0usize);
    for &m in &line_pts {
        offset.push(offset.last().unwrap() + m);
    }
    let mut coords = Vec::with_capacity(*offset.last().unwrap());
    for (k, &m) in line_pts.iter().enumerate() {
        let segs = (m - 1) as f64;
        for j in 0..m {
            let v = if j == m - 1 { 1.0 } else { j as f64 / segs };
            coords.push(spec.target_edge.place([xs[k], v]));
        }
    }

    let mut tris = Vec::new();
    for k in 0..strips {
        let n = counts[k];
        let rl = (line_pts[k] - 1) / n;
        let rr = (line_pts[k + 1] - 1) / n;
        let lid = |j: usize| offset[k] + j;
        let rid = |j: usize| offset[k + 1] + j;
        for j in 0..n {
            let (bl, tl) = (lid(j * rl), lid((j + 1) * rl));
            let (br, tr) = (rid(j * rr), rid((j + 1) * rr));
            match (rl, rr) {
                (1, 1) => {
                    tris.push([bl, br, tr]);
                    tris.push([bl, tr, tl]);
                }
                (2, 1) => {
                    let ml = lid(j * rl + 1);
                    tris.push([bl, br, ml]);
                    tris.push([ml, br, tr]);
                    tris.push([ml, tr, tl]);
                }
                (1, 2) => {
                    let mr = rid(j * rr + 1);
                    tris.push([bl, br, mr]);
                    tris.push([bl, mr, tl]);
                    tris.push([mr, tr, tl]);
                }
                _ => {
                    let ml = lid(j * rl + 1);
                    let mr = rid(j * rr + 1);
                    tris.push([bl, br, mr]);
                    tris.push([bl, mr, ml]);
                    tris.push([ml, mr, tr]);
                    tris.push([ml, tr, tl]);
                }
            }
        }
    }
    if spec.target_edge.reflects() {
        for t in tris.iter_mut() {
            t.swap(1, 2);
        }
    }
    let mesh = Mesh::new(coords, tris)?.with_grading(*spec, layers);
    mesh.validate_unit_square()?;
    Ok(mesh)
}
