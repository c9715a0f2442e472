use super::quadrature::composite_gauss_legendre;
use super::SpecialValue;
use crate::error::{Error, Result};

const POINTS_PER_PANEL: usize = 16;
/// Tail cut: the integrand is below `e^{-TAIL}` times its value at the origin.
const TAIL: f64 = 46.0;

/// `K_nu(z) = int_0^inf e^{-z cosh u} cosh(nu u) du` for real `nu >= 0`, `z > 0`.
///
/// The integral is evaluated after the substitution `u = sinh v`, which turns the
/// double-exponential decay into a rapidly convergent composite Gauss-Legendre sum.
/// The error bound is the change between the rule and its panel-doubled refinement.
pub fn bessel_k(nu: f64, z: f64) -> Result<SpecialValue> {
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::Domain {
            function: "bessel_k",
            value: nu,
            expected: "order nu >= 0",
        });
    }
    check_z("bessel_k", z)?;
    cosh_family(z, nu, |u| (nu * u).cosh())
}

pub fn bessel_k1(z: f64) -> Result<SpecialValue> {
    bessel_k(1.0, z)
}

/// `int_0^inf e^{-z cosh u} cosh^m(u) du`.
///
/// `(-1)^m d^m K_1 / dz^m` at `z` equals `cosh_moment(m + 1, z)`.
pub fn cosh_moment(m: u32, z: f64) -> Result<SpecialValue> {
    check_z("cosh_moment", z)?;
    cosh_family(z, m as f64, |u| u.cosh().powi(m as i32))
}

fn check_z(function: &'static str, z: f64) -> Result<()> {
    if z > 0.0 && z.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            function,
            value: z,
            expected: "z > 0",
        })
    }
}

/// Integrates `e^{-z cosh u} g(u)` over `u > 0`, where `g` grows at most like `e^{growth u}`.
fn cosh_family<G: Fn(f64) -> f64>(z: f64, growth: f64, g: G) -> Result<SpecialValue> {
    // e^{-z} is factored out so the integrand stays O(1) near the origin for large z.
    let log_decay = |u: f64| -z * (u.cosh() - 1.0) + growth * u;
    let peak = if growth > 0.0 {
        // maximizer of log_decay: z sinh u = growth
        (growth / z).asinh()
    } else {
        0.0
    };
    let top = log_decay(peak);
    let mut u_max = peak + 1.0;
    while log_decay(u_max) > top - TAIL {
        u_max += 0.5;
        if u_max > 800.0 {
            return Err(Error::NonConvergent {
                what: "K-integral truncation search",
                iterations: 1600,
                last_change: log_decay(u_max),
            });
        }
    }
    let v_max = u_max.asinh();
    let f = |v: f64| {
        let u = v.sinh();
        (-z * (u.cosh() - 1.0)).exp() * g(u) * v.cosh()
    };
    let panels = ((v_max * 6.0).ceil() as usize).max(4);
    let coarse = composite_gauss_legendre(panels, POINTS_PER_PANEL, 0.0, v_max)?.integrate(f);
    let fine = composite_gauss_legendre(2 * panels, POINTS_PER_PANEL, 0.0, v_max)?.integrate(f);
    let scale = (-z).exp();
    let value = fine * scale;
    let bound = ((fine - coarse).abs() + 4.0 * f64::EPSILON * fine.abs()) * scale;
    if !value.is_finite() {
        return Err(Error::NonConvergent {
            what: "K-integral quadrature",
            iterations: 2,
            last_change: f64::NAN,
        });
    }
    Ok(SpecialValue::new(value, bound))
}
