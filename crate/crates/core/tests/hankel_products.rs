use std::sync::Arc;

use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use taukernel_core::hankel_products::*;
use taukernel_core::specfun::{composite_gauss_legendre, halfline_rule};

// u(x) = e^{-x/2} x (2 - x), the alpha = 1, n = 1 Laguerre function written out.
fn u1(x: f64) -> f64 {
    (-x / 2.0).exp() * x * (2.0 - x)
}

fn du1(x: f64) -> f64 {
    (-x / 2.0).exp() * (2.0 - 2.0 * x - x * (2.0 - x) / 2.0)
}

fn independent_integral<F: Fn(f64) -> f64>(f: F) -> f64 {
    composite_gauss_legendre(200, 10, 0.0, 120.0).unwrap().integrate(f)
}

#[test]
fn zero_psi_gives_zero_kernel() {
    let spec = IntegrableKernelSpec::new(
        Arc::new(|_| DVector::zeros(2)),
        None,
        symplectic_j(1),
        OmegaData {
            omega_inf: DMatrix::zeros(2, 2),
            omega_const: DMatrix::identity(2, 2),
            poles: vec![],
        },
    )
    .unwrap();
    assert_eq!(integrable_kernel(&spec, 1.0, 2.0).unwrap(), 0.0);
    assert_eq!(integrable_kernel(&spec, 1.0, 1.0).unwrap(), 0.0);
}

#[test]
fn laguerre_kernel_matches_direct_formula() {
    let spec = IntegrableKernelSpec::laguerre(1, 1.0).unwrap();
    let k = integrable_kernel(&spec, 1.0, 2.0).unwrap();
    let direct = (u1(1.0) * du1(2.0) - du1(1.0) * u1(2.0)) / (1.0 - 2.0);
    assert_relative_eq!(k, direct, max_relative = 1e-13);
    assert_relative_eq!(k, 2.0 * (-1.5f64).exp(), max_relative = 1e-13);
    assert!(k > 0.0);
}

#[test]
fn diagonal_limit_matches_difference_fallback() {
    let analytic = IntegrableKernelSpec::laguerre(1, 1.0).unwrap();
    let psi = Arc::new(|x: f64| DVector::from_vec(vec![u1(x), du1(x)]));
    let fallback = IntegrableKernelSpec::new(
        psi,
        None,
        symplectic_j(1),
        analytic.omega().clone(),
    )
    .unwrap();
    let a = integrable_kernel(&analytic, 1.0, 1.0).unwrap();
    let b = integrable_kernel(&fallback, 1.0, 1.0).unwrap();
    assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
    let near = integrable_kernel(&analytic, 1.0, 1.0 + 1e-5).unwrap();
    assert!((a - near).abs() <= 1e-4);
}

#[test]
fn laguerre_function_derivatives_match_differences() {
    let h = 1e-3;
    for &(n, alpha) in &[(0, 1.0), (1, 1.0), (3, 0.5), (4, 2.0)] {
        for &x in &[0.7, 1.5, 3.0, 6.0] {
            let u = |x: f64| laguerre_function(n, alpha, x).0;
            let d1 = (u(x - 2.0 * h) - 8.0 * u(x - h) + 8.0 * u(x + h) - u(x + 2.0 * h)) / (12.0 * h);
            let d2 = (-u(x - 2.0 * h) + 16.0 * u(x - h) - 30.0 * u(x) + 16.0 * u(x + h)
                - u(x + 2.0 * h))
                / (12.0 * h * h);
            let (_, a1, a2) = laguerre_function(n, alpha, x);
            assert!((a1 - d1).abs() < 1e-9, "n={n} x={x}: {a1} vs {d1}");
            assert!((a2 - d2).abs() < 1e-6, "n={n} x={x}: {a2} vs {d2}");
        }
    }
}

#[test]
fn laguerre_ode_residuals() {
    let grid: Vec<f64> = (0..=90).map(|i| 0.5 + 0.05 * i as f64).collect();
    assert!(laguerre_ode_residual(1, 1.0, &grid).unwrap() <= 1e-6);
    assert!(laguerre_ode_residual(0, 1.0, &grid).unwrap() <= 1e-8);
    assert!(laguerre_ode_residual(5, 2.5, &grid).unwrap() <= 1e-6);
    assert!(laguerre_ode_residual(1, 1.0, &[0.0, 1.0]).is_err());
}

#[test]
fn n0_ode_closed_form() {
    // u = x e^{-x/2}: u'' = (x/4 - 1) e^{-x/2}, c(x) = 1/x - 1/4.
    for &x in &[0.5f64, 1.0, 2.0, 4.0] {
        let u = x * (-x / 2.0).exp();
        let d2u = (x / 4.0 - 1.0) * (-x / 2.0).exp();
        assert!((d2u + (1.0 / x - 0.25) * u).abs() < 1e-15);
        let (lu, _, ld2u) = laguerre_function(0, 1.0, x);
        assert_relative_eq!(lu, u, max_relative = 1e-14);
        assert_relative_eq!(ld2u, d2u, max_relative = 1e-12);
    }
}

#[test]
fn exponential_product_is_elementary() {
    let fact = HankelFactorization::exponential();
    let rule = halfline_rule(200, 1.0).unwrap();
    for &(z, w) in &[(0.1, 0.2), (1.0, 3.0), (2.5, 0.5)] {
        let k = hankel_product_kernel(&fact, z, w, &rule).unwrap();
        let exact = (-(z + w)).exp() / 2.0;
        assert!((k - exact).abs() <= 1e-10, "{k} vs {exact}");
    }
    let empty = HankelFactorization::new();
    assert_eq!(hankel_product_kernel(&empty, 1.0, 2.0, &rule).unwrap(), 0.0);
}

#[test]
fn exponential_product_decays_monotonically() {
    let fact = HankelFactorization::exponential();
    let rule = halfline_rule(200, 1.0).unwrap();
    let values: Vec<f64> = (0..40)
        .map(|i| hankel_product_kernel(&fact, 0.5 * i as f64, 1.0, &rule).unwrap())
        .collect();
    assert!(values.windows(2).all(|p| p[1] < p[0]));
    assert!(*values.last().unwrap() < 1e-8);
}

#[test]
fn slowly_decaying_factor_is_rejected() {
    let fact = HankelFactorization::new()
        .with_pair(Arc::new(|t: f64| 1.0 / (1.0 + t)), Arc::new(|t: f64| 1.0 / (1.0 + t)));
    let rule = halfline_rule(100, 1.0).unwrap();
    assert!(hankel_product_kernel(&fact, 1.0, 1.0, &rule).is_err());
    assert!(fact.hs_moment(&rule).is_err());
    assert!(HankelFactorization::exponential().hs_moment(&rule).is_ok());
}

#[test]
fn printed_laguerre_identity_is_off_by_n_plus_one() {
    let rep = laguerre_identity_check(1, 1.0, 2.0).unwrap();
    let rhs = independent_integral(|t| u1(1.0 + t) * u1(2.0 + t) / ((1.0 + t) * (2.0 + t)));
    assert_relative_eq!(rep.rhs, rhs, max_relative = 1e-11);
    assert!(rep.lhs > 0.0 && rep.rhs > 0.0);
    assert_relative_eq!(rep.ratio, 2.0, max_relative = 1e-9);
    assert!(!rep.printed_passed());
    assert!(rep.corrected_passed(), "{}", rep.corrected_residual);
}

#[test]
fn corrected_identity_at_second_sample() {
    let rep = laguerre_identity_check(2, 0.5, 3.0).unwrap();
    assert_relative_eq!(rep.ratio, 3.0, max_relative = 1e-8);
    assert!(rep.corrected_residual <= 1e-8);
}

#[test]
fn identity_on_the_diagonal() {
    for n in 0..4 {
        let rep = laguerre_identity_check(n, 1.5, 1.5).unwrap();
        assert!(rep.corrected_residual <= 1e-6, "n={n}: {}", rep.corrected_residual);
    }
    assert!(laguerre_identity_check(1, 0.0, 1.0).is_err());
}

#[test]
fn integrable_kernel_equals_hankel_products_on_grid() {
    let rule = halfline_rule(400, 4.0).unwrap();
    let samples = [0.3, 0.8, 1.7, 2.9, 4.4];
    for n in [1usize, 3] {
        let spec = IntegrableKernelSpec::laguerre(n, 1.0).unwrap();
        let fact = HankelFactorization::laguerre(n);
        for &z in &samples {
            for &w in &samples {
                let k = integrable_kernel(&spec, z, w).unwrap();
                let h = hankel_product_kernel(&fact, z, w, &rule).unwrap();
                assert!((k - h).abs() <= 1e-8, "n={n} ({z},{w}): {k} vs {h}");
            }
        }
    }
}

#[test]
fn assembled_operator_has_the_trace_of_the_factorization() {
    let rule = halfline_rule(120, 1.0).unwrap();
    let inner = halfline_rule(120, 2.0).unwrap();
    let k = HankelFactorization::exponential().assemble(&rule, &inner).unwrap();
    assert!((k.trace() - 0.25).abs() < 1e-10);
    let lag = HankelFactorization::laguerre(2);
    let inner = halfline_rule(200, 4.0).unwrap();
    let outer = halfline_rule(200, 4.0).unwrap();
    let op = lag.assemble(&outer, &inner).unwrap();
    let diag_abs: f64 = op.matrix().diagonal().iter().map(|v| v.abs()).sum();
    assert!(diag_abs.is_finite());
    assert_relative_eq!(op.trace(), lag.trace(&inner), max_relative = 1e-7);
    let moment = IntegrableKernelSpec::laguerre(2, 1.0).unwrap().moment(&inner).unwrap();
    assert!(moment.is_finite() && moment > 0.0);
}

#[test]
fn invalid_structure_is_rejected() {
    let omega = OmegaData {
        omega_inf: DMatrix::zeros(2, 2),
        omega_const: DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]),
        poles: vec![],
    };
    let psi = Arc::new(|_: f64| DVector::zeros(2));
    assert!(IntegrableKernelSpec::new(psi.clone(), None, symplectic_j(1), omega).is_err());
    let ok = OmegaData {
        omega_inf: DMatrix::zeros(2, 2),
        omega_const: DMatrix::identity(2, 2),
        poles: vec![],
    };
    let bad_j = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    assert!(IntegrableKernelSpec::new(psi.clone(), None, bad_j, ok.clone()).is_err());
    assert!(IntegrableKernelSpec::new(psi, None, DMatrix::identity(3, 3), ok).is_err());
}

#[test]
fn antidiagonal_five() {
    let rep = antidiagonal_matrix_props(5).unwrap();
    assert_eq!(rep.trace, 1);
    assert!(rep.square_is_identity && rep.symmetric && rep.constant_on_cross_diagonals);
}

proptest! {
    #[test]
    fn antidiagonal_structure(j in 1usize..40) {
        let rep = antidiagonal_matrix_props(j).unwrap();
        prop_assert_eq!(rep.trace, (j % 2) as i64);
        prop_assert!(rep.square_is_identity);
        prop_assert!(rep.symmetric && rep.constant_on_cross_diagonals);
        prop_assert!(rep.divided_difference_residual < 1e-12);
    }

    #[test]
    fn divided_difference_identity(j in 1usize..8, a in -2.0f64..-0.1, z in 0.1f64..5.0, dw in 0.05f64..3.0) {
        prop_assert!(divided_difference_residual(j, a, z, z + dw) < 1e-10);
    }

    #[test]
    fn laguerre_kernel_is_symmetric(n in 0usize..6, z in 0.1f64..8.0, w in 0.1f64..8.0) {
        prop_assume!((z - w).abs() > 1e-3);
        let spec = IntegrableKernelSpec::laguerre(n, 1.0).unwrap();
        let a = integrable_kernel(&spec, z, w).unwrap();
        let b = integrable_kernel(&spec, w, z).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }
}
