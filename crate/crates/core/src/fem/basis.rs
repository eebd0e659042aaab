//! Bernstein basis of degree `p` on the reference triangle with barycentric
//! coordinates `λ_0 = 1 − x̂ − ŷ`, `λ_1 = x̂`, `λ_2 = ŷ`.

use crate::quadrature::{compositions, factorial};

/// Local edges as pairs of local vertex indices.
pub const LOCAL_EDGES: [(usize, usize); 3] = [(0, 1), (1, 2), (0, 2)];

/// What a local dof is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalEntity {
    Vertex(usize),
    /// Local edge index into [`LOCAL_EDGES`].
    Edge(usize),
    Interior,
}

#[derive(Debug, Clone)]
pub struct ElementBasis {
    p: usize,
    /// Barycentric exponents per local dof.
    gammas: Vec<[usize; 3]>,
    entities: Vec<LocalEntity>,
    scale: Vec<f64>,
}

impl ElementBasis {
    /// Local dofs are ordered vertices, then edges (dofs along `(i, j)` with
    /// `γ_j = 1, …, p−1`), then interior dofs.
    pub fn new(p: usize) -> Self {
        assert!(p >= 1);
        let mut gammas = Vec::new();
        let mut entities = Vec::new();
        for v in 0..3 {
            let mut g = [0; 3];
            g[v] = p;
            gammas.push(g);
            entities.push(LocalEntity::Vertex(v));
        }
        for (k, &(i, j)) in LOCAL_EDGES.iter().enumerate() {
            for a in 1..p {
                let mut g = [0; 3];
                g[i] = p - a;
                g[j] = a;
                gammas.push(g);
                entities.push(LocalEntity::Edge(k));
            }
        }
        if p >= 3 {
            for c in compositions(p - 3, 3) {
                gammas.push([c[0] + 1, c[1] + 1, c[2] + 1]);
                entities.push(LocalEntity::Interior);
            }
        }
        let scale = gammas
            .iter()
            .map(|g| factorial(p) / (factorial(g[0]) * factorial(g[1]) * factorial(g[2])))
            .collect();
        Self {
            p,
            gammas,
            entities,
            scale,
        }
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    pub fn gamma(&self, i: usize) -> [usize; 3] {
        self.gammas[i]
    }

    pub fn entity(&self, i: usize) -> LocalEntity {
        self.entities[i]
    }

    /// Values and reference gradients of every basis function at `x̂`.
    pub fn eval(&self, xh: [f64; 2]) -> (Vec<f64>, Vec<[f64; 2]>) {
        let lam = [1.0 - xh[0] - xh[1], xh[0], xh[1]];
        // pw[i][e] = λ_i^e
        let pw: Vec<Vec<f64>> = lam
            .iter()
            .map(|&l| {
                let mut v = vec![1.0; self.p + 1];
                for e in 1..=self.p {
                    v[e] = v[e - 1] * l;
                }
                v
            })
            .collect();
        let dlam = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
        let mut vals = Vec::with_capacity(self.len());
        let mut grads = Vec::with_capacity(self.len());
        for (g, &c) in self.gammas.iter().zip(&self.scale) {
            vals.push(c * pw[0][g[0]] * pw[1][g[1]] * pw[2][g[2]]);
            let mut gr = [0.0; 2];
            for i in 0..3 {
                if g[i] == 0 {
                    continue;
                }
                let mut d = c * g[i] as f64;
                for (k, &e) in g.iter().enumerate() {
                    d *= if k == i { pw[k][e - 1] } else { pw[k][e] };
                }
                gr[0] += d * dlam[i][0];
                gr[1] += d * dlam[i][1];
            }
            grads.push(gr);
        }
        (vals, grads)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dof_counts() {
        for p in 1..=4 {
            assert_eq!(ElementBasis::new(p).len(), (p + 1) * (p + 2) / 2);
        }
    }

    #[test]
    fn partition_of_unity_and_zero_gradient_sum() {
        let b = ElementBasis::new(4);
        let (v, g) = b.eval([0.2, 0.35]);
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let gx: f64 = g.iter().map(|d| d[0]).sum();
        let gy: f64 = g.iter().map(|d| d[1]).sum();
        assert!(gx.abs() < 1e-13 && gy.abs() < 1e-13);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let b = ElementBasis::new(3);
        let x = [0.21, 0.43];
        let h = 1e-6;
        let (_, g) = b.eval(x);
        let (vp, _) = b.eval([x[0] + h, x[1]]);
        let (vm, _) = b.eval([x[0] - h, x[1]]);
        for i in 0..b.len() {
            let fd = (vp[i] - vm[i]) / (2.0 * h);
            assert!((fd - g[i][0]).abs() < 1e-8);
        }
    }

    #[test]
    fn p1_is_nodal() {
        let b = ElementBasis::new(1);
        let (v, _) = b.eval([1.0, 0.0]);
        assert_eq!(v, vec![0.0, 1.0, 0.0]);
    }
}
