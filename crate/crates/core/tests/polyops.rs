use hgraded_core::fem::{fe_function_pieces, random_fe_function, DofMap};
use hgraded_core::mesh::Mesh;
use hgraded_core::polyops::{
    barycentric_poly, best_approximation, combined_lift, degree_reduce, elementwise_reduce,
    lift_coefficients, lift_face, lift_sum, max_boundary_value, max_interior_jump, node_value,
    poly_quadrature_norm, reference_node, subsimplices, telescoping_product, BoundaryPoly, Region,
    SimplexPoly, SubSimplex,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

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

fn random_poly(dim: usize, p: usize, rng: &mut ChaCha8Rng) -> SimplexPoly {
    let terms = multi_indices(dim, p)
        .into_iter()
        .map(|q| (q, rng.gen_range(-1.0..1.0)));
    SimplexPoly::from_terms(dim, p, terms).unwrap()
}

/// `Π_{i ∈ S} λ_i`
fn lambda_product(d: usize, nodes: &[usize]) -> SimplexPoly {
    nodes.iter().fold(SimplexPoly::constant(d, 1.0), |acc, &i| {
        acc.mul(&barycentric_poly(d, i))
    })
}

/// Elementary symmetric polynomial of degree `m` in `λ_0, …, λ_d`; it vanishes
/// on every subsimplex with fewer than `m` nodes.
fn elementary_symmetric(d: usize, m: usize) -> SimplexPoly {
    subsimplices(d, m - 1)
        .iter()
        .fold(SimplexPoly::zero(d, m), |acc, s| {
            acc.add(&lambda_product(d, s.nodes()))
        })
}

fn max_on(s: &SubSimplex, per_edge: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
    s.sample_points(per_edge)
        .iter()
        .map(|x| f(x).abs())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lift_face_trace_apex_and_norm_law(seed in any::<u64>(), d in 1usize..=3, p in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let face = rng.gen_range(0..=d);
        let f = random_poly(d - 1, p, &mut rng);
        let l = lift_face(&f, face, d, p).unwrap();
        let gamma = SubSimplex::face(d, face);
        let scale = f.max_abs_coeff().max(1.0);
        for t in SubSimplex::whole(d - 1).sample_points(6) {
            prop_assert!((l.eval(&gamma.point(&t)) - f.eval(&t)).abs() < 1e-10 * scale);
        }
        prop_assert!(l.eval(&reference_node(d, face)).abs() < 1e-12 * scale);
        // ‖L f‖² (2p + d) C₁ / C₂ = ‖f‖²_{Γ̂}, C₂ = 1 and C₁ the surface factor of Γ̂
        let lhs = poly_quadrature_norm(&l, Region::Reference).unwrap().powi(2) * (2 * p + d) as f64 * gamma.gram_factor();
        let rhs = poly_quadrature_norm(&f, Region::Face { d, index: face }).unwrap().powi(2);
        prop_assert!((lhs - rhs).abs() <= 1e-8 * rhs, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn combined_lift_reproduces_compatible_traces(seed in any::<u64>(), d in 1usize..=3, p in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_poly(d, p, &mut rng);
        let f = BoundaryPoly::restrict(&g);
        let l = combined_lift(&f).unwrap();
        prop_assert!(l.degree() <= p);
        for i in 0..=d {
            let face = SubSimplex::face(d, i);
            let err = max_on(&SubSimplex::whole(d - 1), 8, |t| { let x = face.point(t); l.eval(&x) - f.eval_face(i, &x) });
            prop_assert!(err < 1e-10 * g.max_abs_coeff().max(1.0), "face {}: {}", i, err);
        }
    }

    #[test]
    fn node_scaling(seed in any::<u64>(), d in 1usize..=3, p in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = BoundaryPoly::restrict(&random_poly(d, p, &mut rng));
        let m = lift_sum(&f).unwrap();
        for n in 0..=d {
            let lhs = m.eval(&reference_node(d, n));
            prop_assert!((lhs - d as f64 * node_value(&f, n)).abs() < 1e-12 * f.max_abs_coeff().max(1.0));
        }
    }

    #[test]
    fn telescoping_product_annihilates(seed in any::<u64>(), d in 1usize..=3, p in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = BoundaryPoly::restrict(&random_poly(d, p, &mut rng));
        let t = telescoping_product(&f, &lift_coefficients(d)).unwrap();
        prop_assert!(t.max_abs_sampled(8) < 1e-9 * f.max_abs_coeff().max(1.0));
    }

    #[test]
    fn degree_reduce_is_a_projection(seed in any::<u64>(), d in 1usize..=3, p in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_poly(d, p, &mut rng);
        let j = degree_reduce(&f.clone().with_degree(p + 2).unwrap(), p).unwrap();
        prop_assert!(j.max_coeff_diff(&f) < 1e-9);
    }
}

#[test]
fn scaling_on_k_plus_one_simplices_for_inputs_vanishing_on_k_simplices() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for d in 2..=3 {
        for k in 0..d - 1 {
            // e_{k+2}(λ) · q vanishes on every k-subsimplex
            let g = elementary_symmetric(d, k + 2).mul(&random_poly(d, 2, &mut rng));
            let f = BoundaryPoly::restrict(&g);
            let m = lift_sum(&f).unwrap();
            for s in subsimplices(d, k) {
                assert!(max_on(&s, 6, |x| g.eval(x)) < 1e-13);
            }
            for s in subsimplices(d, k + 1) {
                let err = max_on(&s, 6, |x| m.eval(x) - (d - k - 1) as f64 * g.eval(x));
                assert!(err < 1e-10, "d={d} k={k} on {:?}: {err}", s.nodes());
            }
        }
    }
}

#[test]
fn lift_face_propagates_zeros_to_the_apex_cone() {
    for d in 2..=3 {
        for face in 0..=d {
            let gamma = SubSimplex::face(d, face);
            // vanish on the sub-face of Γ̂ that omits its first node: the face-local λ of that node
            let f = SimplexPoly::constant(d - 1, 1.0)
                .sub(&(0..d - 1).fold(SimplexPoly::zero(d - 1, 1), |a, j| {
                    a.add(&SimplexPoly::coordinate(d - 1, j))
                }))
                .mul(&SimplexPoly::affine(0.3, &vec![0.7; d - 1]));
            let l = lift_face(&f, face, d, 4).unwrap();
            let mut cone: Vec<usize> = gamma.nodes()[1..].to_vec();
            cone.push(face);
            let sigma_plus = SubSimplex::new(d, cone).unwrap();
            let worst = sigma_plus
                .sample_points(9)
                .iter()
                .map(|x| l.eval(x).abs())
                .fold(0.0, f64::max);
            assert!(worst < 1e-11, "d={d} face={face}: {worst}");
        }
    }
}

#[test]
fn degree_reduce_traces_depend_only_on_the_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for d in 2..=3 {
        let p = 3;
        let f = random_poly(d, p + 2, &mut rng);
        for s in subsimplices(d, d - 1).into_iter().chain(subsimplices(d, 1)) {
            // perturbation vanishing on Σ̂: a multiple of λ_i for some node i ∉ Σ̂
            let off = (0..=d).find(|i| !s.contains_node(*i)).unwrap();
            let bump = barycentric_poly(d, off).mul(&random_poly(d, p + 1, &mut rng));
            let a = degree_reduce(&f, p).unwrap();
            let b = degree_reduce(&f.add(&bump), p).unwrap();
            let err = max_on(&s, 8, |x| a.eval(x) - b.eval(x));
            assert!(err < 1e-9, "d={d} Σ={:?}: {err}", s.nodes());
        }
    }
}

#[test]
fn x_cubed_reduces_to_x() {
    let f = SimplexPoly::coordinate(1, 0).pow(3);
    let j = degree_reduce(&f, 1).unwrap();
    assert!(j.max_coeff_diff(&SimplexPoly::coordinate(1, 0)) < 1e-12);
}

#[test]
fn quasi_optimality_constants_are_finite() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for d in 1..=3 {
        for p in 1..=4 {
            let mut worst = 0.0f64;
            for _ in 0..5 {
                let f = random_poly(d, p + 2, &mut rng);
                let err =
                    poly_quadrature_norm(&f.sub(&degree_reduce(&f, p).unwrap()), Region::Reference)
                        .unwrap();
                let best = poly_quadrature_norm(
                    &f.sub(&best_approximation(&f, p).unwrap()),
                    Region::Reference,
                )
                .unwrap();
                assert!(err >= best * (1.0 - 1e-9));
                worst = worst.max(err / best);
            }
            let c = worst / (p as f64).powf((d * (d + 1)) as f64 / 4.0);
            println!("d={d} p={p}: ‖f − Ĵf‖ / inf ≤ {worst:.3}, scaled constant {c:.3}");
            assert!(c.is_finite());
        }
    }
}

fn three_patch() -> Mesh {
    Mesh::new(
        vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.3, 0.3]],
        vec![[0, 1, 3], [1, 2, 3], [2, 0, 3]],
    )
    .unwrap()
}

#[test]
fn elementwise_reduction_is_continuous_and_vanishes_on_the_boundary() {
    let m = three_patch();
    for p in 1..=4 {
        let f = random_fe_function(&m, p + 2, p as u64).unwrap();
        let j = elementwise_reduce(&m, &f, p).unwrap();
        assert!(max_interior_jump(&m, &j) < 1e-9, "p={p}");
        assert!(max_boundary_value(&m, &j) < 1e-9, "p={p}");
        assert!(j.pieces().iter().all(|q| q.actual_degree() <= p));
    }
}

#[test]
fn elementwise_reduction_preserves_supports() {
    let m = three_patch();
    let p = 2;
    let dm = DofMap::new(&m, p + 2);
    // coefficients only on dofs that are absent from element 2
    let foreign: Vec<usize> = dm.element_dofs(2).to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let u: Vec<f64> = (0..dm.len())
        .map(|n| {
            if foreign.contains(&dm.interior(n).global) {
                0.0
            } else {
                rng.gen_range(-1.0..1.0)
            }
        })
        .collect();
    assert!(u.iter().any(|&v| v != 0.0));
    let f = fe_function_pieces(&m, &dm, &dm.extend(&u)).unwrap();
    assert!(f.piece(2).max_abs_coeff() < 1e-15);
    let j = elementwise_reduce(&m, &f, p).unwrap();
    assert!(j.piece(2).max_abs_coeff() < 1e-12);
    assert!(j.piece(0).max_abs_coeff() > 1e-6);
}

#[test]
fn elementwise_reduction_keeps_degree_p_input() {
    let m = three_patch();
    let p = 3;
    let f = random_fe_function(&m, p, 5).unwrap();
    let lifted = hgraded_core::polyops::PiecewisePoly::new(
        &m,
        f.pieces()
            .iter()
            .map(|q| q.clone().with_degree(p + 2).unwrap())
            .collect(),
    )
    .unwrap();
    let j = elementwise_reduce(&m, &lifted, p).unwrap();
    for (a, b) in j.pieces().iter().zip(f.pieces()) {
        assert!(a.max_coeff_diff(b) < 1e-9);
    }
}
