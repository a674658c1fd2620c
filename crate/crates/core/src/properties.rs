//! Property tests for the algebraic identities the library relies on.

use crate::almost_abelian::{
    canonical_sigma_squares, jordan_type_of_nilpotent, nilpotent_soliton_canonical, verify_nilpotent_soliton,
    JordanType,
};
use crate::bracket::{
    act_gl, almost_abelian_matrix, derivation_space, jacobi_form, jacobi_residual, make_almost_abelian, pi_action,
    project_to_jacobi, wedge_square, Bracket,
};
use crate::curvature::{moment_identity_residual, p_endo, q_endo, theta_form};
use crate::io::{parse_bracket, parse_matrix, write_bracket, write_matrix};
use crate::random::{gaussian_matrix, random_nilpotent_sample, random_unitary};
use crate::tensor::{commutator, id_wedge, inner, wedge_endo, CMatrix, C64};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random element of `ℂ^{n×N}`; not a Lie bracket in general.
fn random_tensor(seed: u64, n: usize) -> Bracket {
    let m = gaussian_matrix(&mut rng(seed), n, n * (n - 1) / 2);
    Bracket::from_matrix(m).unwrap()
}

fn hermitian_psd_defect(m: &CMatrix) -> (f64, f64) {
    let herm = (m - m.adjoint()).norm();
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let min_eig = h.map(|z| z.re).symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    (herm, min_eig)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn wedge_product_is_symmetric_and_extends_id_wedge(seed in any::<u64>(), n in 2usize..6) {
        let mut r = rng(seed);
        let a = gaussian_matrix(&mut r, n, n);
        let b = gaussian_matrix(&mut r, n, n);
        let ab = wedge_endo(&a, &b).unwrap();
        let ba = wedge_endo(&b, &a).unwrap();
        prop_assert!((&ab - &ba).norm() < 1e-12 * ab.norm().max(1.0));
        let with_id = wedge_endo(&CMatrix::identity(n, n), &a).unwrap();
        prop_assert!((with_id - id_wedge(&a)).norm() < 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn wedge_square_is_multiplicative(seed in any::<u64>(), n in 2usize..6) {
        let mut r = rng(seed);
        let g = gaussian_matrix(&mut r, n, n);
        let h = gaussian_matrix(&mut r, n, n);
        let lhs = wedge_square(&(&g * &h));
        let rhs = wedge_square(&g) * wedge_square(&h);
        prop_assert!((&lhs - &rhs).norm() < 1e-10 * lhs.norm().max(1.0));
    }

    #[test]
    fn bracket_adjoint_matches_inner_product(seed in any::<u64>(), n in 2usize..6) {
        let mut r = rng(seed);
        let mu = random_tensor(seed, n);
        let x = gaussian_matrix(&mut r, mu.wedge_dim(), 1);
        let y = gaussian_matrix(&mut r, n, 1);
        let lhs = inner(&(mu.matrix() * &x), &y);
        let rhs = inner(&x, &(mu.adjoint() * &y));
        prop_assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0));
    }

    #[test]
    fn change_of_basis_composes(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mu = random_nilpotent_sample(&mut r, 5);
        let n = mu.dim();
        let g = gaussian_matrix(&mut r, n, n) + CMatrix::identity(n, n) * C64::new(3.0, 0.0);
        let h = gaussian_matrix(&mut r, n, n) + CMatrix::identity(n, n) * C64::new(3.0, 0.0);
        let lhs = act_gl(&g, &act_gl(&h, &mu).unwrap()).unwrap();
        let rhs = act_gl(&(&g * &h), &mu).unwrap();
        prop_assert!((lhs.matrix() - rhs.matrix()).norm() < 1e-8 * rhs.norm().max(1.0));
        prop_assert!(jacobi_residual(&rhs) < 1e-8 * rhs.norm_sq().max(1.0));
    }

    #[test]
    fn pi_is_a_lie_algebra_representation(seed in any::<u64>(), n in 3usize..6) {
        let mut r = rng(seed);
        let mu = random_tensor(seed, n);
        let a = gaussian_matrix(&mut r, n, n);
        let b = gaussian_matrix(&mut r, n, n);
        let lhs = &pi_action(&a, &pi_action(&b, &mu)) - &pi_action(&b, &pi_action(&a, &mu));
        let rhs = pi_action(&commutator(&a, &b), &mu);
        prop_assert!((lhs.matrix() - rhs.matrix()).norm() < 1e-9 * rhs.norm().max(1.0));
    }

    #[test]
    fn p_and_q_are_hermitian_psd_and_equivariant(seed in any::<u64>(), n in 2usize..6) {
        let mut r = rng(seed);
        let mu = random_tensor(seed, n);
        let scale = mu.norm_sq();
        for m in [p_endo(&mu), q_endo(&mu)] {
            let (herm, min_eig) = hermitian_psd_defect(&m);
            prop_assert!(herm < 1e-12 * scale);
            prop_assert!(min_eig > -1e-12 * scale);
        }
        let u = random_unitary(&mut r, n);
        let moved = act_gl(&u, &mu).unwrap();
        let p_expected = &u * p_endo(&mu) * u.adjoint();
        let q_expected = &u * q_endo(&mu) * u.adjoint();
        prop_assert!((p_endo(&moved) - p_expected).norm() < 1e-10 * scale);
        prop_assert!((q_endo(&moved) - q_expected).norm() < 1e-10 * scale);
    }

    #[test]
    fn theta_operator_equals_p(seed in any::<u64>(), n in 2usize..6) {
        let mu = random_tensor(seed, n);
        prop_assert!((theta_form(&mu) - p_endo(&mu)).norm() < 1e-12 * mu.norm_sq());
    }

    #[test]
    fn moment_identity_holds_on_lie_brackets(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mu = random_nilpotent_sample(&mut r, 6);
        let e = gaussian_matrix(&mut r, mu.dim(), mu.dim());
        prop_assert!(moment_identity_residual(&mu, &e) < 1e-10);
    }

    #[test]
    fn derivations_close_under_commutator(seed in any::<u64>()) {
        let mu = random_nilpotent_sample(&mut rng(seed), 5);
        let ders = derivation_space(&mu, 1e-10).basis;
        prop_assert!(!ders.is_empty());
        for d in &ders {
            prop_assert!(pi_action(d, &mu).norm() < 1e-9);
        }
        let c = commutator(&ders[0], ders.last().unwrap());
        prop_assert!(pi_action(&c, &mu).norm() < 1e-8 * c.norm().max(1.0));
    }

    #[test]
    fn jacobi_form_matches_residual(seed in any::<u64>(), n in 3usize..6) {
        let mu = random_tensor(seed, n);
        let j = jacobi_form(mu.matrix(), mu.matrix()).norm();
        prop_assert!((j - jacobi_residual(&mu)).abs() < 1e-10 * j.max(1.0));
    }

    #[test]
    fn jacobi_projection_repairs_small_perturbations(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mu = random_nilpotent_sample(&mut r, 5);
        let noise = gaussian_matrix(&mut r, mu.dim(), mu.wedge_dim()) * C64::new(1e-6, 0.0);
        let mut m = mu.matrix() + noise;
        let before = jacobi_form(&m, &m).norm();
        project_to_jacobi(&mut m, None, 3);
        let after = jacobi_form(&m, &m).norm();
        // Nilpotent brackets are singular points of the variety, so the
        // iteration contracts only linearly there.
        prop_assert!(after <= 1e-4 * before, "before {before:e} after {after:e}");
    }

    #[test]
    fn almost_abelian_round_trip(seed in any::<u64>(), n in 1usize..6) {
        let a = gaussian_matrix(&mut rng(seed), n, n);
        let mu = make_almost_abelian(&a).unwrap();
        prop_assert_eq!(jacobi_residual(&mu), 0.0);
        prop_assert!((almost_abelian_matrix(&mu) - a).norm() == 0.0);
    }

    #[test]
    fn bracket_files_round_trip(seed in any::<u64>(), n in 2usize..6) {
        let mu = random_tensor(seed, n);
        let back = parse_bracket(&write_bracket(&mu)).unwrap();
        prop_assert_eq!(back.matrix(), mu.matrix());
        let a = gaussian_matrix(&mut rng(seed ^ 1), n, n);
        prop_assert_eq!(parse_matrix(&write_matrix(&a)).unwrap(), a);
    }
}

fn jordan_types() -> impl Strategy<Value = JordanType> {
    (1usize..=7).prop_flat_map(|n| {
        let all = JordanType::all(n);
        (0..all.len()).prop_map(move |i| all[i].clone())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_entries_are_square_roots_of_integers(jt in jordan_types()) {
        let b = nilpotent_soliton_canonical(&jt);
        let squares: Vec<u64> = canonical_sigma_squares(&jt).into_iter().flatten().collect();
        let mut entries: Vec<f64> = b.iter().filter(|z| z.norm() > 0.0).map(|z| z.re).collect();
        entries.sort_by(f64::total_cmp);
        let mut expected: Vec<f64> = squares.iter().map(|&s| (s as f64).sqrt()).collect();
        expected.sort_by(f64::total_cmp);
        prop_assert_eq!(entries, expected);
        prop_assert!(verify_nilpotent_soliton(&b).residual < 1e-12);
    }

    #[test]
    fn jordan_type_survives_conjugation(jt in jordan_types(), seed in any::<u64>()) {
        let b = nilpotent_soliton_canonical(&jt);
        let u = random_unitary(&mut rng(seed), jt.n());
        let moved = &u * b * u.adjoint();
        prop_assert_eq!(jordan_type_of_nilpotent(&moved, 1e-10).unwrap(), jt.clone());
        prop_assert_eq!(jt.to_string().parse::<JordanType>().unwrap(), jt);
    }
}
