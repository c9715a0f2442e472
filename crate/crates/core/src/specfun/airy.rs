use std::f64::consts::PI;

use super::SpecialValue;

/// `Ai(0)`
const C1: f64 = 0.355_028_053_887_817_2;
/// `-Ai'(0)`
const C2: f64 = 0.258_819_403_792_806_8;
/// Maclaurin series below this point, asymptotic expansion above.
const CROSSOVER: f64 = 5.0;
const MAX_TERMS: usize = 200;

/// Airy function `Ai(x)`.
///
/// Accurate to about `1e-12` absolute on `[0, 12]`; negative arguments use the
/// Maclaurin series and lose accuracy to cancellation as `|x|` grows, which the
/// returned bound reflects.
pub fn airy(x: f64) -> SpecialValue {
    if x > CROSSOVER {
        asymptotic(x)
    } else {
        maclaurin(x)
    }
}

fn maclaurin(x: f64) -> SpecialValue {
    let x3 = x * x * x;
    let (mut f, mut g) = (1.0, x);
    let (mut tf, mut tg) = (1.0, x);
    let (mut abs_f, mut abs_g) = (1.0, x.abs());
    let mut last = f64::INFINITY;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        tf *= x3 / ((3.0 * kf - 1.0) * 3.0 * kf);
        tg *= x3 / (3.0 * kf * (3.0 * kf + 1.0));
        f += tf;
        g += tg;
        abs_f += tf.abs();
        abs_g += tg.abs();
        last = C1 * tf.abs() + C2 * tg.abs();
        if last <= 1e-18 * (C1 * abs_f + C2 * abs_g) {
            break;
        }
    }
    let value = C1 * f - C2 * g;
    let rounding = 8.0 * f64::EPSILON * (C1 * abs_f + C2 * abs_g);
    SpecialValue::new(value, rounding + last)
}

fn asymptotic(x: f64) -> SpecialValue {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let prefactor = (-zeta).exp() / (2.0 * PI.sqrt() * x.powf(0.25));
    let mut sum = 1.0;
    let mut u = 1.0;
    let mut term = 1.0f64;
    let mut omitted = 0.0;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let next = if k % 2 == 0 { u } else { -u } / zeta.powi(k as i32);
        if next.abs() >= term.abs() {
            omitted = next.abs();
            break;
        }
        sum += next;
        term = next;
        omitted = next.abs();
    }
    let value = prefactor * sum;
    SpecialValue::new(value, prefactor * (omitted + 4.0 * f64::EPSILON))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_at_origin() {
        let expected = 3f64.powf(-2.0 / 3.0) / crate::specfun::gamma(2.0 / 3.0);
        assert!((airy(0.0).value - expected).abs() < 1e-15);
        assert!((airy(0.0).value - 0.355_028_053_9).abs() < 1e-10);
    }

    #[test]
    fn positive_and_decreasing_on_right_axis() {
        let vals: Vec<f64> = (1..=10).map(|k| airy(k as f64).value).collect();
        assert!(vals.iter().all(|&v| v > 0.0));
        assert!(vals.windows(2).all(|p| p[1] < p[0]));
    }

    #[test]
    fn leading_asymptotic_term() {
        let x: f64 = 8.0;
        let r = airy(x).value * 2.0 * PI.sqrt() * x.powf(0.25) * (2.0 / 3.0 * x.powf(1.5)).exp();
        assert!((r - 1.0).abs() < 0.01);
    }

    #[test]
    fn branches_agree_near_crossover() {
        for &x in &[5.0, 5.5, 6.0, 7.0] {
            let a = maclaurin(x);
            let b = asymptotic(x);
            assert!((a.value - b.value).abs() < 1e-11, "x={x}: {} vs {}", a.value, b.value);
        }
    }

    #[test]
    fn error_bounds_on_right_axis() {
        for k in 0..=48 {
            let x = 0.25 * k as f64;
            assert!(airy(x).abs_error_bound <= 1e-10, "x={x}");
        }
    }

    #[test]
    fn satisfies_airy_equation() {
        // Ai'' = x Ai
        let h = 1e-3;
        for &x in &[0.5, 2.0, 4.0, 7.0, 10.0] {
            let d2 = (airy(x + h).value - 2.0 * airy(x).value + airy(x - h).value) / (h * h);
            let scale = airy(x).value.abs().max(1e-300);
            assert!((d2 - x * airy(x).value).abs() / scale < 1e-4, "x={x}");
        }
    }

    #[test]
    fn known_values() {
        // Ai(1), Ai(-1), Ai(10)
        assert!((airy(1.0).value - 0.135_292_416_312_881_4).abs() < 1e-15);
        assert!((airy(-1.0).value - 0.535_560_883_292_352_1).abs() < 1e-14);
        assert!((airy(10.0).value / 1.104_753_255_289_868_8e-10 - 1.0).abs() < 1e-10);
    }
}
