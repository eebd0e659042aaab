/// Axis-parallel box in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl BBox {
    pub fn new(lo: [f64; 2], hi: [f64; 2]) -> Self {
        debug_assert!(lo[0] <= hi[0] && lo[1] <= hi[1]);
        Self { lo, hi }
    }

    pub fn from_points<'a>(pts: impl IntoIterator<Item = &'a [f64; 2]>) -> Option<Self> {
        let mut it = pts.into_iter();
        let first = *it.next()?;
        Some(it.fold(
            Self {
                lo: first,
                hi: first,
            },
            |b, p| b.including(*p),
        ))
    }

    fn including(self, p: [f64; 2]) -> Self {
        Self {
            lo: [self.lo[0].min(p[0]), self.lo[1].min(p[1])],
            hi: [self.hi[0].max(p[0]), self.hi[1].max(p[1])],
        }
    }

    pub fn union(&self, other: &BBox) -> BBox {
        self.including(other.lo).including(other.hi)
    }

    pub fn center(&self) -> [f64; 2] {
        [
            0.5 * (self.lo[0] + self.hi[0]),
            0.5 * (self.lo[1] + self.hi[1]),
        ]
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    /// Euclidean diameter.
    pub fn diam(&self) -> f64 {
        self.extent(0).hypot(self.extent(1))
    }

    /// Euclidean distance between the boxes (0 if they touch or overlap).
    pub fn dist(&self, other: &BBox) -> f64 {
        let gap = |k: usize| {
            (other.lo[k] - self.hi[k])
                .max(self.lo[k] - other.hi[k])
                .max(0.0)
        };
        gap(0).hypot(gap(1))
    }

    pub fn contains_box(&self, other: &BBox, tol: f64) -> bool {
        (0..2).all(|k| other.lo[k] >= self.lo[k] - tol && other.hi[k] <= self.hi[k] + tol)
    }

    pub fn is_nonempty(&self) -> bool {
        self.lo[0] < self.hi[0] && self.lo[1] < self.hi[1]
    }
}
