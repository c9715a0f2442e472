use approx::assert_relative_eq;
use proptest::prelude::*;
use taukernel_core::painleve::*;
use taukernel_core::specfun::{bessel_k1, halfline_rule};

const K1_AT_2: f64 = 0.13986588181652243;
const K1_AT_4: f64 = 0.012483498887268432;

// Exact det of [ (alpha+j+k)! ] by fraction-free Bareiss elimination.
fn factorial_hankel_det(alpha: usize, n: usize) -> i128 {
    let fact = |m: usize| (1..=m as i128).product::<i128>();
    let mut a: Vec<Vec<i128>> = (0..n)
        .map(|j| (0..n).map(|k| fact(alpha + j + k)).collect())
        .collect();
    let mut prev = 1i128;
    for k in 0..n - 1 {
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    a[n - 1][n - 1]
}

#[test]
fn moment_examples() {
    assert!((moment(0.0, 0.0, 3).unwrap().0 - 6.0).abs() <= 1e-10);
    let (m, how) = moment(0.0, 1.0, 0).unwrap();
    assert_eq!(how, MomentMethod::Bessel);
    assert!((m - 2.0 * K1_AT_2).abs() <= 1e-9);
    let q = moment_quadrature(0.0, 1.0, 0, &moment_rule(0.0, 1.0, 0).unwrap()).unwrap();
    assert!((q - 2.0 * K1_AT_2).abs() <= 1e-9);
    let near = moment(0.0, 1e-6, 0).unwrap().0;
    assert!((near - 1.0).abs() <= 1e-3);
}

#[test]
fn moments_by_quadrature_agree_with_closed_forms() {
    for &alpha in &[0.0, 0.5, 1.0, 2.0] {
        for &s in &[0.0, 0.1, 1.0, 3.0] {
            let closed = MomentTable::new(alpha, s, 11).unwrap();
            let quad = MomentTable::by_quadrature(alpha, s, 11).unwrap();
            for (a, b) in closed.moments.iter().zip(&quad.moments) {
                assert_relative_eq!(*a, *b, max_relative = 1e-10);
            }
        }
    }
}

#[test]
fn plain_halfline_rule_also_resolves_moments() {
    let rule = halfline_rule(400, 3.0).unwrap();
    let q = moment_quadrature(1.0, 1.0, 2, &rule).unwrap();
    assert_relative_eq!(q, moment(1.0, 1.0, 2).unwrap().0, max_relative = 1e-9);
}

#[test]
fn determinant_examples() {
    assert_relative_eq!(hankel_det(0.0, 0.0, 1).unwrap().value(), 1.0, max_relative = 1e-14);
    assert_relative_eq!(hankel_det(0.0, 0.0, 3).unwrap().value(), 4.0, max_relative = 1e-8);
    assert_relative_eq!(hankel_det(1.0, 0.0, 4).unwrap().value(), 3456.0, max_relative = 1e-7);
}

#[test]
fn determinants_match_exact_integer_oracle() {
    for alpha in 0..3usize {
        for n in 1..=7usize {
            let exact = factorial_hankel_det(alpha, n) as f64;
            let d = hankel_det(alpha as f64, 0.0, n).unwrap();
            assert!((d.log_det - exact.ln()).abs() <= 1e-8, "alpha={alpha} n={n}");
        }
    }
}

#[test]
fn barnes_closed_form() {
    for alpha in [0.0, 1.0, 2.0] {
        for n in 1..=MAX_ORDER {
            let c = barnes_formula_check(alpha, n).unwrap();
            assert!(c.relative_residual <= 1e-7, "alpha={alpha} n={n}: {}", c.relative_residual);
        }
    }
    assert_relative_eq!(barnes_formula_log(1.0, 4).unwrap().exp(), 3456.0, max_relative = 1e-10);
}

#[test]
fn andreief_identity() {
    let one = andreief_check(1, 2.0).unwrap();
    assert_relative_eq!(one.lhs, K1_AT_2, max_relative = 1e-12);
    assert!(one.relative_residual <= 1e-10);
    for t in [2.0, 5.0] {
        let two = andreief_check(2, t).unwrap();
        assert!(two.lhs > 0.0);
        assert!(two.relative_residual <= 1e-6, "t={t}: {}", two.relative_residual);
    }
    assert!(andreief_check(2, 0.0).is_err());
}

#[test]
fn cosh_substitution_jacobian() {
    for t in [0.5, 2.0, 6.0] {
        let (lhs, rhs) = change_of_variables_check(t).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
    }
}

#[test]
fn scattering_closed_form() {
    let (q, c) = scattering_bessel_form(1.0, 1.0).unwrap();
    assert_relative_eq!(q, 2.0 * K1_AT_2, max_relative = 1e-9);
    assert_relative_eq!(c, 2.0 * K1_AT_2, max_relative = 1e-9);
    let (q, c) = scattering_bessel_form(4.0, 1.0).unwrap();
    assert_relative_eq!(q, 4.0 * K1_AT_4, max_relative = 1e-9);
    assert_relative_eq!(c, 4.0 * K1_AT_4, max_relative = 1e-9);
    // y -> y/x: phi(x; s) = phi(1; s x) / x
    for &(s, x) in &[(0.3, 2.0), (2.0, 0.7), (5.0, 3.0)] {
        let (a, _) = scattering_bessel_form(s, x).unwrap();
        let (b, _) = scattering_bessel_form(s * x, 1.0).unwrap();
        assert_relative_eq!(a, b / x, max_relative = 1e-10);
    }
    assert!(scattering_bessel_form(0.0, 1.0).is_err());
}

#[test]
fn determinant_decreases_in_s() {
    for alpha in [0.0, 1.0] {
        for n in 1..=5 {
            let d: Vec<f64> = [0.0, 0.5, 1.0, 2.0]
                .iter()
                .map(|&s| hankel_det(alpha, s, n).unwrap().log_det)
                .collect();
            assert!(d.windows(2).all(|w| w[1] < w[0]), "alpha={alpha} n={n}: {d:?}");
        }
    }
}

#[test]
fn moment_matrices_are_positive_definite() {
    for alpha in [0.0, 1.0] {
        for s in [0.0, 1.0] {
            for n in 1..=6 {
                let d = hankel_det(alpha, s, n).unwrap();
                assert!(d.min_eigenvalue > 0.0, "alpha={alpha} s={s} n={n}");
                assert!(d.condition.is_finite());
            }
        }
    }
}

#[test]
fn log_det_is_smooth_in_s() {
    for n in 1..=4 {
        let mut prev: Option<f64> = None;
        for i in 0..=6 {
            let s = 0.5 + 0.25 * i as f64;
            let (d1, d2) = log_det_derivatives(0.0, n, s, 1e-3).unwrap();
            assert!(d1 < 0.0 && d1.is_finite());
            assert!(d2.abs() < 50.0, "n={n} s={s}: {d2}");
            if let Some(p) = prev {
                // first derivative moves by about d2 * 0.25
                assert!((d1 - p).abs() < 0.25 * 50.0);
            }
            prev = Some(d1);
        }
    }
}

#[test]
fn n1_log_derivative_is_moment_ratio() {
    // d/ds log mu_0 = -int y^(alpha-1) w / int y^alpha w = -mu_{-1}/mu_0 = -(s^{-1/2}) K_0/K_1 (alpha=0)
    let s = 1.0;
    let (d1, _) = log_det_derivatives(0.0, 1, s, 1e-4).unwrap();
    let k0 = taukernel_core::specfun::bessel_k(0.0, 2.0).unwrap().value;
    let k1 = bessel_k1(2.0).unwrap().value;
    assert_relative_eq!(d1, -k0 / k1, max_relative = 1e-7);
}

proptest! {
    #[test]
    fn moments_are_positive_and_log_convex(alpha in 0.0f64..3.0, s in 0.0f64..4.0) {
        let t = MomentTable::new(alpha, s, 9).unwrap();
        prop_assert!(t.moments.iter().all(|&m| m > 0.0));
        prop_assert!(t.log_convexity_ratio() <= 1.0 + 1e-12);
    }

    #[test]
    fn small_determinants_are_positive(alpha in 0.0f64..2.0, s in 0.0f64..3.0, n in 1usize..6) {
        let d = hankel_det(alpha, s, n).unwrap();
        prop_assert!(d.sign > 0.0 && d.log_det.is_finite());
    }
}
