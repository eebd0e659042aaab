use std::sync::Arc;

use hgraded_core::fem::{
    assemble_load, assemble_stiffness, dual_stability_probe, fem_solve, solve_dense_inverse,
    Carrier, Coefficients, SparseMatrix,
};
use hgraded_core::mesh::{element_patch, make_graded_mesh, GradingSpec, Mesh, TargetEdge};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn uniform(h: f64) -> Mesh {
    make_graded_mesh(&GradingSpec::uniform(h)).unwrap()
}

fn to_nalgebra(a: &SparseMatrix) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(a.dim(), a.dim());
    for (i, j, v) in a.triplets() {
        m[(i, j)] = v;
    }
    m
}

fn vertex_of(dof: Carrier) -> usize {
    match dof {
        Carrier::Vertex(v) => v,
        other => panic!("P1 dof on {other:?}"),
    }
}

/// Barycentric coordinates of `x` in element `e`.
fn bary(mesh: &Mesh, e: usize, x: [f64; 2]) -> [f64; 3] {
    let [a, b, c] = mesh.element_coords(e);
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let l1 = ((x[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (x[1] - a[1])) / det;
    let l2 = ((b[0] - a[0]) * (x[1] - a[1]) - (x[0] - a[0]) * (b[1] - a[1])) / det;
    [1.0 - l1 - l2, l1, l2]
}

/// Piecewise-linear hat function of vertex `v`, by brute-force point location.
fn hat(mesh: &Mesh, v: usize, x: [f64; 2]) -> f64 {
    for e in 0..mesh.num_elements() {
        let l = bary(mesh, e, x);
        if l.iter().all(|&t| t >= -1e-12) {
            let ids = mesh.elements()[e].vertex_ids;
            return (0..3).find(|&i| ids[i] == v).map_or(0.0, |i| l[i]);
        }
    }
    panic!("point outside mesh")
}

#[test]
fn p1_laplacian_is_the_five_point_stencil() {
    let m = uniform(0.125);
    let (a, dm) = assemble_stiffness(&m, &Coefficients::laplace(), 1).unwrap();
    let h = 0.125;
    for row in 0..dm.len() {
        let xi = m.vertices()[vertex_of(dm.interior(row).carrier)].coords;
        for col in 0..dm.len() {
            let xj = m.vertices()[vertex_of(dm.interior(col).carrier)].coords;
            let (dx, dy) = (
                ((xj[0] - xi[0]) / h).round() as i64,
                ((xj[1] - xi[1]) / h).round() as i64,
            );
            let expect = match (dx.abs(), dy.abs()) {
                (0, 0) => 4.0,
                (1, 0) | (0, 1) => -1.0,
                _ => 0.0,
            };
            assert!(
                (a.get(row, col) - expect).abs() < 1e-13,
                "({row},{col}) = {}",
                a.get(row, col)
            );
        }
    }
}

#[test]
fn symmetric_forms_give_spd_matrices() {
    let mut c = Coefficients::constant([[2.0, 0.3], [0.3, 1.0]], [0.0, 0.0], 0.0);
    c.a3 = Arc::new(|x| 1.0 + x[0] * x[1]);
    let m = make_graded_mesh(&GradingSpec::exponential(0.25, TargetEdge::Bottom, 4)).unwrap();
    for p in 1..=3 {
        let (a, _) = assemble_stiffness(&m, &c, p).unwrap();
        assert!(a.asymmetry() <= 1e-13 * a.max_abs());
        assert!(a.is_structurally_symmetric());
        let mut n = to_nalgebra(&a);
        n = (&n + n.transpose()) * 0.5;
        assert!(n.cholesky().is_some(), "p = {p}");
    }
}

#[test]
fn convection_adds_an_antisymmetric_part() {
    let m = uniform(0.125);
    let (ad, _) = assemble_stiffness(&m, &Coefficients::laplace(), 1).unwrap();
    let (a, _) = assemble_stiffness(
        &m,
        &Coefficients::constant([[1.0, 0.0], [0.0, 1.0]], [1.0, 0.0], 0.0),
        1,
    )
    .unwrap();
    let skew = to_nalgebra(&a) - to_nalgebra(&ad);
    assert!((&skew + skew.transpose()).abs().max() < 1e-14);
    assert!(skew.abs().max() > 1e-3);
    assert!(a.is_structurally_symmetric());
}

#[test]
fn p1_load_of_one_is_a_third_of_the_patch_area() {
    let m = make_graded_mesh(&GradingSpec::algebraic(2.0, 0.25, TargetEdge::Left)).unwrap();
    let b = assemble_load(&m, &|_| 1.0, 1).unwrap();
    let (_, dm) = assemble_stiffness(&m, &Coefficients::laplace(), 1).unwrap();
    let ve = m.vertex_elements();
    for (row, &bi) in b.iter().enumerate() {
        let v = vertex_of(dm.interior(row).carrier);
        let area: f64 = ve[v].iter().map(|&e| m.element_area(e)).sum();
        assert!((bi - area / 3.0).abs() < 1e-15, "{bi} vs {}", area / 3.0);
    }
    assert!(assemble_load(&m, &|_| 0.0, 3)
        .unwrap()
        .iter()
        .all(|&x| x == 0.0));
}

#[test]
fn load_of_a_hat_function_is_the_mass_diagonal() {
    let m = uniform(0.25);
    let mass = Coefficients::constant([[0.0; 2]; 2], [0.0, 0.0], 1.0);
    let (mm, dm) = assemble_stiffness(&m, &mass, 1).unwrap();
    let ve = m.vertex_elements();
    for k in [0, 4, dm.len() - 1] {
        let v = vertex_of(dm.interior(k).carrier);
        // exact P1 mass diagonal: |patch| / 6
        let area: f64 = ve[v].iter().map(|&e| m.element_area(e)).sum();
        assert!((mm.get(k, k) - area / 6.0).abs() < 1e-15);
        let b = assemble_load(&m, &|x| hat(&m, v, x), 1).unwrap();
        assert!((b[k] - area / 6.0).abs() < 1e-14);
    }
}

#[test]
fn inverse_of_the_nine_point_system() {
    let m = uniform(0.25);
    let (a, dm) = assemble_stiffness(&m, &Coefficients::laplace(), 1).unwrap();
    assert_eq!(dm.len(), 9);
    let inv = solve_dense_inverse(&a).unwrap();
    let prod = to_nalgebra(&a) * DMatrix::from_row_slice(9, 9, inv.as_slice());
    assert!((prod - DMatrix::identity(9, 9)).abs().max() < 1e-13);
}

#[test]
fn inverse_residual_on_a_graded_p2_system() {
    let m = make_graded_mesh(&GradingSpec::exponential(0.25, TargetEdge::Left, 6)).unwrap();
    let (a, _) = assemble_stiffness(&m, &Coefficients::laplace(), 2).unwrap();
    let inv = solve_dense_inverse(&a).unwrap();
    let prod = to_nalgebra(&a) * DMatrix::from_row_slice(a.dim(), a.dim(), inv.as_slice());
    let resid = prod - DMatrix::identity(a.dim(), a.dim());
    let inf = (0..a.dim())
        .map(|i| resid.row(i).abs().sum())
        .fold(0.0, f64::max);
    assert!(inf <= 1e-7, "{inf}");
}

fn sin_solution(x: [f64; 2]) -> f64 {
    use std::f64::consts::PI;
    (PI * x[0]).sin() * (PI * x[1]).sin()
}

fn sin_rhs(x: [f64; 2]) -> f64 {
    2.0 * std::f64::consts::PI.powi(2) * sin_solution(x)
}

fn slope(p: usize) -> f64 {
    let hs = [0.25, 0.125, 0.0625];
    let errs: Vec<f64> = hs
        .iter()
        .map(|&h| {
            fem_solve(
                &uniform(h),
                &Coefficients::laplace(),
                &sin_rhs,
                p,
                Some(&sin_solution),
            )
            .unwrap()
            .l2_error
            .unwrap()
        })
        .collect();
    // least-squares slope of log e against log h
    let xs: Vec<f64> = hs.iter().map(|h: &f64| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

#[test]
fn p1_converges_at_second_order() {
    let s = slope(1);
    assert!((s - 2.0).abs() < 0.15, "slope {s}");
}

#[test]
fn p2_converges_at_third_order() {
    let s = slope(2);
    assert!((s - 3.0).abs() < 0.2, "slope {s}");
}

#[test]
fn zero_load_gives_zero_solution() {
    let sol = fem_solve(&uniform(0.25), &Coefficients::laplace(), &|_| 0.0, 2, None).unwrap();
    assert!(sol.coeffs.iter().all(|&u| u == 0.0));
}

#[test]
fn galerkin_consistency() {
    let mut c = Coefficients::constant([[1.5, 0.2], [0.1, 1.0]], [0.5, -0.3], 0.5);
    c.a3 = Arc::new(|x| 0.5 + x[0]);
    let m = make_graded_mesh(&GradingSpec::algebraic(3.0, 0.25, TargetEdge::Top)).unwrap();
    for p in 1..=3 {
        let f = |x: [f64; 2]| (3.0 * x[0]).cos() + x[1];
        let sol = fem_solve(&m, &c, &f, p, None).unwrap();
        let (a, _) = assemble_stiffness(&m, &c, p).unwrap();
        let b = assemble_load(&m, &f, p).unwrap();
        let fnorm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        let au = a.matvec(&sol.coeffs);
        for (x, y) in au.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-10 * fnorm);
        }
    }
}

#[test]
fn laplacian_ritz_values_are_positive() {
    let m = make_graded_mesh(&GradingSpec::exponential(0.25, TargetEdge::Right, 5)).unwrap();
    let (a, _) = assemble_stiffness(&m, &Coefficients::laplace(), 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let x: Vec<f64> = (0..a.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ax = a.matvec(&x);
        let q: f64 = x.iter().zip(&ax).map(|(a, b)| a * b).sum();
        assert!(q > 0.0);
    }
}

#[test]
fn nonzeros_stay_within_shared_elements() {
    let m = make_graded_mesh(&GradingSpec::exponential(0.25, TargetEdge::Left, 4)).unwrap();
    let (a, dm) = assemble_stiffness(&m, &Coefficients::laplace(), 3).unwrap();
    let elements_of = |n: usize| -> Vec<usize> {
        (0..m.num_elements())
            .filter(|&e| dm.element_dofs(e).contains(&dm.interior(n).global))
            .collect()
    };
    for (i, j, _) in a.triplets() {
        let (ei, ej) = (elements_of(i), elements_of(j));
        assert!(ei.iter().any(|e| ej.contains(e)), "({i},{j})");
    }
}

#[test]
fn support_boxes_lie_in_the_characteristic_patch() {
    let m = make_graded_mesh(&GradingSpec::exponential(0.25, TargetEdge::Bottom, 4)).unwrap();
    let (_, dm) = assemble_stiffness(&m, &Coefficients::laplace(), 2).unwrap();
    for d in dm.interior_dofs() {
        assert!(d.support.is_nonempty());
        let patch = element_patch(&m, d.char_element).unwrap();
        let pts: Vec<[f64; 2]> = patch.iter().flat_map(|&e| m.element_coords(e)).collect();
        let lo = [
            pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min),
            pts.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min),
        ];
        let hi = [
            pts.iter().map(|p| p[0]).fold(0.0, f64::max),
            pts.iter().map(|p| p[1]).fold(0.0, f64::max),
        ];
        assert!(d.support.lo[0] >= lo[0] && d.support.lo[1] >= lo[1]);
        assert!(d.support.hi[0] <= hi[0] && d.support.hi[1] <= hi[1]);
    }
}

/// `∫_{T̂} λ^γ = γ! / (|γ| + d)!` gives the Bernstein Gram matrix in closed form.
fn gram_oracle(p: usize) -> DMatrix<f64> {
    let fact = |n: usize| (1..=n).map(|k| k as f64).product::<f64>();
    let idx: Vec<[usize; 3]> = (0..=p)
        .rev()
        .flat_map(|a| (0..=p - a).rev().map(move |b| [a, b, p - a - b]))
        .collect();
    let coef = |g: &[usize; 3]| fact(p) / (fact(g[0]) * fact(g[1]) * fact(g[2]));
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| {
        let s = [
            idx[i][0] + idx[j][0],
            idx[i][1] + idx[j][1],
            idx[i][2] + idx[j][2],
        ];
        coef(&idx[i]) * coef(&idx[j]) * fact(s[0]) * fact(s[1]) * fact(s[2]) / fact(2 * p + 2)
    })
}

#[test]
fn dual_norms_match_the_closed_form_gram_inverse() {
    let mut logs = Vec::new();
    for p in 1..=6 {
        let probe = dual_stability_probe(p, 2).unwrap();
        let inv = gram_oracle(p).try_inverse().unwrap();
        let oracle = (0..inv.nrows())
            .map(|j| inv[(j, j)])
            .fold(0.0, f64::max)
            .sqrt();
        assert!((probe.max_norm - oracle).abs() < 1e-8 * oracle, "p = {p}");
        assert!(
            probe.duality_residual < 1e-10,
            "p = {p}: {}",
            probe.duality_residual
        );
        logs.push(((p as f64).ln(), probe.max_norm.ln()));
    }
    let s = (logs[5].1 - logs[0].1) / (logs[5].0 - logs[0].0);
    println!("Bernstein dual norm growth exponent over p = 1..6: {s:.3}");
    assert!(s.is_finite() && s > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn stiffness_is_symmetric_without_convection(
        d0 in 0.5f64..3.0, d1 in 0.5f64..3.0, off in -0.4f64..0.4, a3 in 0.0f64..2.0, p in 1usize..=3
    ) {
        let c = Coefficients::constant([[d0, off], [off, d1]], [0.0, 0.0], a3);
        let (a, _) = assemble_stiffness(&uniform(0.25), &c, p).unwrap();
        prop_assert!(a.asymmetry() <= 1e-13 * a.max_abs());
    }
}
