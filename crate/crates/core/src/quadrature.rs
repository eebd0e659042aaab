//! Grundmann–Möller rules on the reference simplex
//! `{x ∈ [0,1]^d : Σ xᵢ ≤ 1}` in any dimension.
//!
//! A rule with parameter `s` integrates polynomials of total degree
//! `2s + 1` exactly. Weights alternate in sign, which costs a few digits for
//! large `s`; the table is capped at [`MAX_RULE_DEGREE`].

use thiserror::Error;

/// Highest polynomial degree a rule is built for.
pub const MAX_RULE_DEGREE: usize = 31;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("requested exactness degree {0} exceeds the supported maximum {MAX_RULE_DEGREE}")]
    DegreeTooHigh(usize),
}

/// Points (Cartesian coordinates on the reference simplex) and weights.
/// Weights sum to the simplex volume `1/d!`.
#[derive(Debug, Clone)]
pub struct SimplexRule {
    dim: usize,
    degree: usize,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl SimplexRule {
    /// Rule exact for all polynomials of total degree `≤ degree`.
    pub fn new(dim: usize, degree: usize) -> Result<Self, QuadratureError> {
        if degree > MAX_RULE_DEGREE {
            return Err(QuadratureError::DegreeTooHigh(degree));
        }
        if dim == 0 {
            return Ok(Self {
                dim,
                degree,
                points: vec![Vec::new()],
                weights: vec![1.0],
            });
        }
        let s = degree.saturating_sub(1).div_ceil(2);
        let d = 2 * s + 1;
        let n = dim;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for i in 0..=s {
            let denom = (d + n - 2 * i) as f64;
            // (-1)^i 2^{-2s} (d+n-2i)^d / (i! (d+n-i)!)
            let mut w = if i % 2 == 0 { 1.0 } else { -1.0 };
            w *= 0.25f64.powi(s as i32);
            w *= denom.powi(d as i32);
            w /= factorial(i) * factorial(d + n - i);
            for beta in compositions(s - i, n + 1) {
                // barycentric (2β_k+1)/denom; Cartesian coordinates are components 1..=n
                let pt: Vec<f64> = beta[1..]
                    .iter()
                    .map(|&b| (2 * b + 1) as f64 / denom)
                    .collect();
                points.push(pt);
                weights.push(w);
            }
        }
        Ok(Self {
            dim,
            degree,
            points,
            weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.points
            .iter()
            .map(Vec::as_slice)
            .zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// All `parts`-tuples of non-negative integers summing to `total`, in
/// lexicographic order.
pub(crate) fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    let mut cur = vec![0usize; parts];
    fill(total, 0, &mut cur, &mut out);
    out
}

fn fill(rem: usize, pos: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if pos + 1 == cur.len() {
        cur[pos] = rem;
        out.push(cur.clone());
        return;
    }
    for v in (0..=rem).rev() {
        cur[pos] = v;
        fill(rem - v, pos + 1, cur, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // ∫_{T̂^d} x^α dx = α! / (|α| + d)!
    fn exact_monomial(alpha: &[usize]) -> f64 {
        let num: f64 = alpha.iter().map(|&a| factorial(a)).product();
        num / factorial(alpha.iter().sum::<usize>() + alpha.len())
    }

    #[test]
    fn weights_sum_to_volume() {
        for dim in 1..=4 {
            for degree in [0, 1, 4, 9, 15] {
                let rule = SimplexRule::new(dim, degree).unwrap();
                let total: f64 = rule.weights().iter().sum();
                assert!(
                    (total - 1.0 / factorial(dim)).abs() < 1e-13,
                    "dim {dim} deg {degree}"
                );
            }
        }
    }

    #[test]
    fn exact_for_monomials_up_to_degree() {
        for dim in 1..=3 {
            for degree in [2, 5, 10, 14] {
                let rule = SimplexRule::new(dim, degree).unwrap();
                for total in 0..=degree {
                    for alpha in compositions(total, dim) {
                        let q = rule.integrate(|x| {
                            x.iter()
                                .zip(&alpha)
                                .map(|(xi, &a)| xi.powi(a as i32))
                                .product()
                        });
                        let e = exact_monomial(&alpha);
                        assert!(
                            (q - e).abs() <= 1e-12 * e.max(1e-3),
                            "{dim} {alpha:?}: {q} vs {e}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn zero_dimensional_rule_is_point_evaluation() {
        let rule = SimplexRule::new(0, 7).unwrap();
        assert_eq!(rule.len(), 1);
        assert_eq!(rule.integrate(|_| 3.5), 3.5);
    }

    #[test]
    fn too_high_degree_rejected() {
        assert!(SimplexRule::new(2, MAX_RULE_DEGREE + 1).is_err());
    }

    #[test]
    fn compositions_count() {
        // C(total + parts - 1, parts - 1)
        assert_eq!(compositions(3, 3).len(), 10);
        assert_eq!(compositions(0, 4).len(), 1);
        assert!(compositions(2, 0).is_empty());
    }
}
