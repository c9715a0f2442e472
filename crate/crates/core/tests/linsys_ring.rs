use taukernel_core::linalg::symmetric_eigenvalues;
use taukernel_core::linsys::{kdv_hierarchy_check, mkdv_w_plus, DiscreteLinearSystem, RingContext};
use taukernel_core::operator::TabulatedWeight;
use taukernel_core::specfun::{bessel_k1, halfline_rule};
use taukernel_core::Error;

fn system(n: usize, amp: f64, t: f64) -> DiscreteLinearSystem {
    let h = TabulatedWeight::from_fn(halfline_rule(n, 1.0).unwrap(), |y| amp * (-y).exp());
    DiscreteLinearSystem::howland(&h, t).unwrap()
}

fn zero_system() -> DiscreteLinearSystem {
    system(40, 0.0, 1.0)
}

/// Fourth-order central first derivative.
fn d1<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Fourth-order central second derivative.
fn d2<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h))
        / (12.0 * h * h)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn zero_input_gives_zero_resolvent() {
    let sys = zero_system();
    assert!(sys.resolvent_r(0.5).iter().all(|&v| v == 0.0));
}

#[test]
fn lyapunov_equation() {
    let sys = system(150, 2.0, 0.5);
    let (x, h) = (0.8, 1e-4);
    let dr = (sys.resolvent_r(x + h) - sys.resolvent_r(x - h)) / (2.0 * h);
    let lhs = sys.lyapunov_lhs(x);
    assert!((&dr + &lhs).norm() <= 1e-6 * lhs.norm());
    let rhs = sys.lyapunov_rhs(x);
    assert!((&dr + &rhs).abs().max() <= 1e-6 * rhs.abs().max());
}

#[test]
fn scattering_matches_closed_form() {
    // h = 1: phi(x; t) = 2 sqrt(2t/x) K_1(2 sqrt(2 t x))
    let h = TabulatedWeight::from_fn(halfline_rule(300, 1.0).unwrap(), |_| 1.0);
    let sys = DiscreteLinearSystem::howland(&h, 1.0).unwrap();
    for &x in &[0.5f64, 1.0, 2.0] {
        let exact = 2.0 * (2.0 / x).sqrt() * bessel_k1(2.0 * (2.0 * x).sqrt()).unwrap().value;
        assert!((sys.scattering(x) - exact).abs() < 1e-9, "x={x}");
        assert!((sys.scattering(x) - h.phi(x, 1.0)).abs() < 1e-14);
    }
}

#[test]
fn system_invariants() {
    let sys = system(80, 1.0, 0.3);
    assert!(sys.nodes().windows(2).all(|p| 0.0 < p[0] && p[0] < p[1]));
    assert_eq!(sys.b(), sys.c());
}

#[test]
fn potential_is_second_log_derivative() {
    let sys = system(200, 3.0, 1.0);
    let h = 1e-2;
    for k in 0..=14 {
        let x = 0.2 + 0.2 * k as f64;
        let u = sys.at(x).unwrap().potential();
        let ld = |x: f64| sys.log_det(x).unwrap();
        let fd = -2.0 * d2(ld, x, h);
        assert!(rel(fd, u) < 1e-5, "x={x}: {fd} vs {u}");
    }
}

fn words(ctx: &RingContext<'_>) -> Vec<taukernel_core::linsys::RingElement> {
    vec![ctx.a(), ctx.a_pow(2), &ctx.f() * &ctx.a()]
}

#[test]
fn bracket_is_multiplicative() {
    let sys = system(200, 3.0, 1.0);
    let ctx = sys.at(0.7).unwrap();
    assert_eq!(ctx.bracket(&ctx.zero()).unwrap(), 0.0);
    for p in words(&ctx) {
        for q in words(&ctx) {
            let lhs = ctx.bracket(&ctx.star(&p, &q).unwrap()).unwrap();
            let rhs = ctx.bracket(&p).unwrap() * ctx.bracket(&q).unwrap();
            assert!(rel(lhs, rhs) < 1e-9, "{lhs} vs {rhs}");
        }
    }
}

#[test]
fn star_product_is_associative() {
    let sys = system(200, 3.0, 1.0);
    let ctx = sys.at(0.7).unwrap();
    let (a, a2) = (ctx.a(), ctx.a_pow(2));
    let left = ctx.star(&ctx.star(&a, &a2).unwrap(), &a).unwrap().matrix;
    let right = ctx.star(&a, &ctx.star(&a2, &a).unwrap()).unwrap().matrix;
    assert!((&left - &right).abs().max() <= 1e-10 * left.abs().max());
    let z = ctx.star(&ctx.zero(), &a).unwrap();
    assert!(z.matrix.iter().all(|&v| v == 0.0));
}

#[test]
fn df_dx_against_finite_differences() {
    let sys = system(150, 3.0, 1.0);
    let (x, h) = (0.6, 1e-3);
    let f = |x: f64| sys.at(x).unwrap().f().matrix;
    let fd = (f(x - 2.0 * h) - f(x - h) * 8.0 + f(x + h) * 8.0 - f(x + 2.0 * h)) / (12.0 * h);
    let m = sys.at(x).unwrap().df_dx().matrix;
    assert!((&fd - &m).abs().max() <= 1e-8 * m.abs().max());
}

#[test]
fn derivation_obeys_leibniz() {
    let sys = system(200, 3.0, 1.0);
    let ctx = sys.at(0.7).unwrap();
    let a = ctx.a();
    let zero = ctx.zero();
    let da = ctx.derivation(&a, &zero).unwrap();
    assert!(ctx.derivation(&zero, &zero).unwrap().matrix.iter().all(|&v| v == 0.0));
    // explicit x-derivative of A * A = A M A by the product rule, dF/dx = M
    let m = ctx.df_dx();
    let f = ctx.f();
    let dm = &(&(&a * &m) + &(&m * &a)) - &(&(&(&m * &a) * &f) + &(&(&f * &a) * &m)).scale(2.0);
    let d_explicit = &(&a * &dm) * &a;
    let lhs = ctx.derivation(&ctx.star(&a, &a).unwrap(), &d_explicit).unwrap();
    let rhs = &ctx.star(&da, &a).unwrap() + &ctx.star(&a, &da).unwrap();
    assert!((&lhs.matrix - &rhs.matrix).abs().max() <= 1e-9 * rhs.matrix.abs().max());
}

#[test]
fn bracket_derivative_is_bracket_of_derivation() {
    let sys = system(200, 3.0, 1.0);
    let h = 1e-3;
    for &x in &[0.4, 0.9, 1.6] {
        for k in [1, 3] {
            let b = |x: f64| sys.at(x).unwrap().bracket_of_a(|y| y.powi(k));
            let fd = d1(b, x, h);
            let ctx = sys.at(x).unwrap();
            let p = ctx.a_pow(k);
            let exact = ctx.bracket(&ctx.derivation(&p, &ctx.zero()).unwrap()).unwrap();
            assert!(rel(fd, exact) < 1e-6, "x={x} k={k}: {fd} vs {exact}");
        }
    }
}

#[test]
fn kdv_hierarchy() {
    let grid: Vec<f64> = (0..=100).map(|k| 1.0 + 0.01 * k as f64).collect();
    let zero = kdv_hierarchy_check(&zero_system(), &grid, 3).unwrap();
    assert!(zero.iter().all(|&r| r == 0.0));
    let h = TabulatedWeight::from_fn(halfline_rule(200, 1.0).unwrap(), |y| (-1.0 / y).exp());
    let sys = DiscreteLinearSystem::howland(&h, 1.0).unwrap();
    let res = kdv_hierarchy_check(&sys, &grid, 2).unwrap();
    assert!(res[0] <= 1e-4, "{res:?}");
    assert!(res[1] <= 1e-3, "{res:?}");
}

#[test]
fn kdv_residual_is_second_order_in_the_step() {
    let h = TabulatedWeight::from_fn(halfline_rule(100, 1.0).unwrap(), |y| (-1.0 / y).exp());
    let sys = DiscreteLinearSystem::howland(&h, 1.0).unwrap();
    let res = |step: f64| {
        let grid: Vec<f64> = (0..=8).map(|k| 0.8 + step * k as f64).collect();
        kdv_hierarchy_check(&sys, &grid, 2).unwrap()[1]
    };
    let ratio = res(1e-2) / res(5e-3);
    assert!((3.5..4.5).contains(&ratio), "{ratio}");
}

#[test]
fn kdv_rejects_coarse_grid() {
    let grid: Vec<f64> = (0..8).map(|k| 0.5 * k as f64).collect();
    assert!(matches!(kdv_hierarchy_check(&zero_system(), &grid, 1), Err(Error::Grid(_))));
}

#[test]
fn mkdv_w_plus_examples() {
    let h = 0.01;
    let xs: Vec<f64> = (0..100).map(|k| -0.5 + h * k as f64).collect();
    let c = mkdv_w_plus(&vec![2.5; xs.len()], h).unwrap();
    assert!(c.iter().all(|w| w.norm() == 0.0));
    let u: Vec<f64> = xs.iter().map(|x| x * x).collect();
    for (w, &x) in mkdv_w_plus(&u, h).unwrap().iter().zip(&xs) {
        assert!((w.re + x * x).abs() < 1e-8);
        assert!((w.im + 1.0).abs() < 1e-8);
    }
    let u: Vec<f64> = xs.iter().map(|x| x.sin() * 3.0).collect();
    assert!(mkdv_w_plus(&u, h).unwrap().iter().all(|w| w.re <= 0.0));
}

#[test]
fn darboux_transform_limits() {
    let sys = system(200, 3.0, 1.0);
    let x = 0.8;
    let u = sys.at(x).unwrap().potential();
    let far = sys.darboux_transform(1e6, 1).unwrap();
    assert!((far.at(x).unwrap().potential() - u).abs() <= 1e-5);
    let zeta = 2.345;
    let back = sys.darboux_transform(zeta, 1).unwrap().darboux_transform(zeta, -1).unwrap();
    let diff = (back.b() - sys.b()).abs().max();
    assert!(diff <= 1e-14 * sys.b().abs().max());
    let moved = sys.darboux_transform(zeta, -1).unwrap().at(x).unwrap().potential();
    assert!(moved.is_finite());
}

#[test]
fn green_series_and_closed_form() {
    let zero = zero_system();
    let ymax = zero.rule().max_node();
    let g = zero.at(0.5).unwrap().green_diagonal_series(-4.0 * ymax * ymax, 8).unwrap();
    assert_eq!((g.partial_sum, g.closed_form), (0.5, 0.5));

    let sys = system(200, 3.0, 1.0);
    let ymax = sys.rule().max_node();
    let lambda = -4.0 * ymax * ymax;
    let ctx = sys.at(0.7).unwrap();
    let g = ctx.green_diagonal_series(lambda, 8).unwrap();
    assert!((g.partial_sum - g.closed_form).abs() < 1e-8);
    for p in g.increments.windows(2) {
        if p[0] != 0.0 {
            assert!((p[1] / p[0]).abs() <= ymax * ymax / lambda.abs());
        }
    }
    assert!(ctx.green_diagonal_series(-ymax * ymax, 4).is_err());
}

#[test]
fn green_series_converges_geometrically_at_moderate_lambda() {
    // a short grid keeps the spectrum small so the series is usable at moderate lambda
    let rule = taukernel_core::specfun::gauss_legendre(40, 0.1, 3.0).unwrap();
    let h = TabulatedWeight::from_fn(rule, |y| 2.0 * (-y).exp());
    let sys = DiscreteLinearSystem::howland(&h, 0.5).unwrap();
    let ctx = sys.at(0.3).unwrap();
    let lambda = -4.0 * 9.0;
    let mut errors = Vec::new();
    for order in 1..=8 {
        let g = ctx.green_diagonal_series(lambda, order).unwrap();
        errors.push((g.partial_sum - g.closed_form).abs());
    }
    assert!(errors.windows(2).all(|p| p[1] < p[0]), "{errors:?}");
    assert!(errors[7] < 1e-5);
}

#[test]
fn infinitesimal_addition_is_derivative_of_green_diagonal() {
    let sys = system(200, 3.0, 1.0);
    let h = 1e-3;
    for &lambda in &[-1.0, -10.0] {
        let x = 0.7;
        let g = |x: f64| 0.5 - sys.at(x).unwrap().bracket_of_a(|y| y / (lambda + y * y));
        let fd = -2.0 / (-lambda).sqrt() * d1(g, x, h);
        let xu = sys.at(x).unwrap().infinitesimal_addition(lambda).unwrap();
        assert!(rel(fd, xu) < 1e-6, "lambda={lambda}: {fd} vs {xu}");
    }
}

#[test]
fn resolvent_decreases_in_x() {
    let sys = system(100, 2.0, 0.5);
    let (r1, r2) = (sys.resolvent_r(0.3), sys.resolvent_r(0.9));
    assert!(r1.iter().zip(r2.iter()).all(|(a, b)| b <= a));
}

#[test]
fn near_singular_resolvent_is_rejected() {
    let base = system(60, 1.0, 0.5);
    let top = *symmetric_eigenvalues(&base.resolvent_r(0.5)).last().unwrap();
    let scale = 1.0 / top.sqrt();
    let sys = DiscreteLinearSystem::from_parts(
        base.rule().clone(),
        base.b() * scale,
        -(base.b() * scale),
        0.5,
    )
    .unwrap();
    assert!(matches!(sys.at(0.5), Err(Error::NearSingular { .. })));
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
    #[test]
    fn homomorphism_holds_for_random_systems(amp in 0.1f64..4.0, x in 0.2f64..2.0, t in 0.2f64..1.5) {
        let sys = system(60, amp, t);
        let ctx = sys.at(x).unwrap();
        let a = ctx.a();
        let a2 = ctx.a_pow(2);
        let lhs = ctx.bracket(&ctx.star(&a, &a2).unwrap()).unwrap();
        let rhs = ctx.bracket(&a).unwrap() * ctx.bracket(&a2).unwrap();
        proptest::prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1e-300));
    }
}
