//! Pass/fail table over the polynomial lifting and degree-reduction
//! identities on reference simplices.

use std::fmt;

use hgraded_core::fem::random_fe_function;
use hgraded_core::mesh::Mesh;
use hgraded_core::polyops::{
    barycentric_poly, degree_ceiling, degree_reduce, elementwise_reduce, lift_coefficients,
    lift_face, lift_sum, max_boundary_value, max_interior_jump, node_value, poly_quadrature_norm,
    reference_node, subsimplices, telescoping_product, BoundaryPoly, PiecewisePoly, Region,
    SimplexPoly, SubSimplex,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const LIFT_NORM_TOL: f64 = 1e-8;
pub const NODE_SCALING_TOL: f64 = 1e-12;
pub const SIMPLEX_SCALING_TOL: f64 = 1e-10;
pub const TELESCOPING_TOL: f64 = 1e-9;
pub const PROJECTION_TOL: f64 = 1e-9;
pub const CONTINUITY_TOL: f64 = 1e-9;

const SAMPLES_PER_EDGE: usize = 8;

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub dims: Vec<usize>,
    pub degrees: Vec<usize>,
    /// Random inputs per `(check, d, p)`.
    pub samples: usize,
    pub seed: u64,
    /// Flip the sign of `c_k` in the telescoping check.
    pub flip_coefficient: Option<usize>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            dims: vec![1, 2, 3],
            degrees: (1..=6).collect(),
            samples: 20,
            seed: 2024,
            flip_coefficient: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    LiftNorm,
    NodeScaling,
    SimplexScaling,
    Telescoping,
    Projection,
    Continuity,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Check::LiftNorm => "lift-norm",
            Check::NodeScaling => "node-scaling",
            Check::SimplexScaling => "simplex-scaling",
            Check::Telescoping => "telescoping",
            Check::Projection => "projection",
            Check::Continuity => "continuity",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Pass,
    Fail,
    Skipped(String),
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub check: Check,
    pub d: usize,
    pub p: usize,
    /// Worst residual, already scaled the way `tol` expects.
    pub worst: f64,
    pub tol: f64,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, Default)]
pub struct SuiteReport {
    pub results: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.outcome != Outcome::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| r.outcome == Outcome::Fail)
    }

    pub fn of(&self, check: Check) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(move |r| r.check == check)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<16} {:>2} {:>2} {:>12} {:>9}  result",
            "check", "d", "p", "worst", "tol"
        )?;
        for r in &self.results {
            let outcome = match &r.outcome {
                Outcome::Pass => "pass".to_owned(),
                Outcome::Fail => "FAIL".to_owned(),
                Outcome::Skipped(why) => format!("skipped: {why}"),
            };
            let worst = if matches!(r.outcome, Outcome::Skipped(_)) {
                "-".to_owned()
            } else {
                format!("{:.3e}", r.worst)
            };
            writeln!(
                f,
                "{:<16} {:>2} {:>2} {:>12} {:>9.0e}  {outcome}",
                r.check.to_string(),
                r.d,
                r.p,
                worst,
                r.tol
            )?;
        }
        let fails = self.failures().count();
        write!(f, "{} checks, {} failed", self.results.len(), fails)
    }
}

pub fn run_identity_suite(opts: &SuiteOptions) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut report = SuiteReport::default();
    for &d in &opts.dims {
        for &p in &opts.degrees {
            let mut checks = vec![
                Check::LiftNorm,
                Check::NodeScaling,
                Check::Telescoping,
                Check::Projection,
            ];
            if d >= 2 {
                checks.insert(2, Check::SimplexScaling);
            }
            if d == 2 {
                checks.push(Check::Continuity);
            }
            for check in checks {
                report.results.push(run_check(check, d, p, opts, &mut rng));
            }
        }
    }
    report
}

fn tolerance(check: Check) -> f64 {
    match check {
        Check::LiftNorm => LIFT_NORM_TOL,
        Check::NodeScaling => NODE_SCALING_TOL,
        Check::SimplexScaling => SIMPLEX_SCALING_TOL,
        Check::Telescoping => TELESCOPING_TOL,
        Check::Projection => PROJECTION_TOL,
        Check::Continuity => CONTINUITY_TOL,
    }
}

fn run_check(
    check: Check,
    d: usize,
    p: usize,
    opts: &SuiteOptions,
    rng: &mut ChaCha8Rng,
) -> CheckResult {
    let tol = tolerance(check);
    let result = |worst: f64, outcome| CheckResult {
        check,
        d,
        p,
        worst,
        tol,
        outcome,
    };
    if d == 0 || p == 0 {
        return result(f64::NAN, Outcome::Skipped("needs d ≥ 1 and p ≥ 1".into()));
    }
    if p > degree_ceiling(d) {
        return result(
            f64::NAN,
            Outcome::Skipped(format!(
                "p above the conditioning ceiling {} for d = {d}: monomial coefficients of the \
                 floating-point liftings lose digits and the exact operator build grows costly",
                degree_ceiling(d)
            )),
        );
    }
    let worst = (0..opts.samples.max(1))
        .map(|_| match check {
            Check::LiftNorm => lift_norm(d, p, rng),
            Check::NodeScaling => node_scaling(d, p, rng),
            Check::SimplexScaling => simplex_scaling(d, p, rng),
            Check::Telescoping => telescoping(d, p, opts.flip_coefficient, rng),
            Check::Projection => projection(d, p, rng),
            Check::Continuity => continuity(p, rng),
        })
        .fold(0.0f64, |a, b| {
            if a.is_nan() || b.is_nan() {
                f64::NAN
            } else {
                a.max(b)
            }
        });
    let outcome = if worst <= tol {
        Outcome::Pass
    } else {
        Outcome::Fail
    };
    result(worst, outcome)
}

/// All multi-indices of `dim` entries with order at most `p`.
fn multi_indices(dim: usize, p: usize) -> Vec<Vec<u32>> {
    if dim == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 0..=p {
        for mut rest in multi_indices(dim - 1, p - first) {
            rest.insert(0, first as u32);
            out.push(rest);
        }
    }
    out
}

pub fn random_poly(dim: usize, p: usize, rng: &mut ChaCha8Rng) -> SimplexPoly {
    let terms = multi_indices(dim, p)
        .into_iter()
        .map(|q| (q, rng.gen_range(-1.0..1.0)));
    SimplexPoly::from_terms(dim, p, terms).expect("indices have order ≤ p")
}

fn max_on(s: &SubSimplex, f: impl Fn(&[f64]) -> f64) -> f64 {
    s.sample_points(SAMPLES_PER_EDGE)
        .iter()
        .map(|x| f(x).abs())
        .fold(0.0, f64::max)
}

/// Relative mismatch of `‖L f‖² (2p + d) C₁ = ‖f‖²_{Γ̂}`.
fn lift_norm(d: usize, p: usize, rng: &mut ChaCha8Rng) -> f64 {
    let face = rng.gen_range(0..=d);
    let f = random_poly(d - 1, p, rng);
    let Ok(l) = lift_face(&f, face, d, p) else {
        return f64::NAN;
    };
    let lhs = poly_quadrature_norm(&l, Region::Reference)
        .map(|v| v * v)
        .unwrap_or(f64::NAN)
        * (2 * p + d) as f64
        * SubSimplex::face(d, face).gram_factor();
    let rhs = poly_quadrature_norm(&f, Region::Face { d, index: face })
        .map(|v| v * v)
        .unwrap_or(f64::NAN);
    (lhs - rhs).abs() / rhs
}

/// `(M̂f)(N̂) = d f(N̂)` at every node.
fn node_scaling(d: usize, p: usize, rng: &mut ChaCha8Rng) -> f64 {
    let f = BoundaryPoly::restrict(&random_poly(d, p, rng));
    let Ok(m) = lift_sum(&f) else { return f64::NAN };
    (0..=d)
        .map(|n| (m.eval(&reference_node(d, n)) - d as f64 * node_value(&f, n)).abs())
        .fold(0.0, f64::max)
}

/// Inputs vanishing on every `k`-subsimplex satisfy `M̂f = (d − k − 1) f` on
/// every `(k+1)`-subsimplex. The input is `e_{k+2}(λ) q` with `e_m` the
/// elementary symmetric polynomial and `deg q = p`.
fn simplex_scaling(d: usize, p: usize, rng: &mut ChaCha8Rng) -> f64 {
    let mut worst = 0.0f64;
    for k in 0..d - 1 {
        let e = subsimplices(d, k + 1)
            .iter()
            .fold(SimplexPoly::zero(d, k + 2), |acc, s| {
                acc.add(
                    &s.nodes()
                        .iter()
                        .fold(SimplexPoly::constant(d, 1.0), |m, &i| {
                            m.mul(&barycentric_poly(d, i))
                        }),
                )
            });
        let g = e.mul(&random_poly(d, p, rng));
        let f = BoundaryPoly::restrict(&g);
        let Ok(m) = lift_sum(&f) else { return f64::NAN };
        for s in subsimplices(d, k + 1) {
            worst = worst.max(max_on(&s, |x| m.eval(x) - (d - k - 1) as f64 * g.eval(x)));
        }
    }
    worst
}

/// `Π_k (id − c_k R̂M̂) f` sampled on `∂T̂ᵈ`; zero for the true `c_k`.
fn telescoping(d: usize, p: usize, flip: Option<usize>, rng: &mut ChaCha8Rng) -> f64 {
    let mut c = lift_coefficients(d);
    if let Some(slot) = flip.and_then(|k| c.get_mut(k)) {
        *slot = -*slot;
    }
    let f = BoundaryPoly::restrict(&random_poly(d, p, rng));
    match telescoping_product(&f, &c) {
        Ok(t) => t.max_abs_sampled(SAMPLES_PER_EDGE),
        Err(_) => f64::NAN,
    }
}

/// Coefficient-wise `‖Ĵ^p f − f‖` for `f ∈ P_p` presented in `P_{p+2}`.
fn projection(d: usize, p: usize, rng: &mut ChaCha8Rng) -> f64 {
    let f = random_poly(d, p, rng);
    let Ok(lifted) = f.clone().with_degree(p + 2) else {
        return f64::NAN;
    };
    degree_reduce(&lifted, p)
        .map(|j| j.max_coeff_diff(&f))
        .unwrap_or(f64::NAN)
}

/// Three triangles around an interior vertex.
pub fn three_patch_mesh() -> Mesh {
    Mesh::new(
        vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.3, 0.3]],
        vec![[0, 1, 3], [1, 2, 3], [2, 0, 3]],
    )
    .expect("fixed valid mesh")
}

/// Interface jumps and boundary values of `J_T^p` applied to a random
/// continuous degree-`(p+2)` function vanishing on the patch boundary.
fn continuity(p: usize, rng: &mut ChaCha8Rng) -> f64 {
    let mesh = three_patch_mesh();
    let Ok(f) = random_fe_function(&mesh, p + 2, rng.gen()) else {
        return f64::NAN;
    };
    match elementwise_reduce(&mesh, &f, p) {
        Ok(j) => reduced_defect(&mesh, &j, p),
        Err(_) => f64::NAN,
    }
}

fn reduced_defect(mesh: &Mesh, j: &PiecewisePoly, p: usize) -> f64 {
    if j.pieces().iter().any(|q| q.actual_degree() > p) {
        return f64::INFINITY;
    }
    max_interior_jump(mesh, j).max(max_boundary_value(mesh, j))
}
