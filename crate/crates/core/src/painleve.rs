//! Hankel determinants of the singularly perturbed Laguerre weight
//! `y^alpha e^{-y - s/y}` on `(0, inf)`.

use log::warn;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::specfun::{
    barnes_g_log, bessel_k, bessel_k1, cosh_moment, exponential_rule, gamma, gauss_legendre,
    QuadratureRule,
};

/// Largest supported determinant order; the moment matrix condition grows like `~16^n`.
pub const MAX_ORDER: usize = 8;
const CONDITION_WARN: f64 = 1e14;
/// Log-integrand drop at which the `v = log y` range is cut.
const LOG_TAIL: f64 = 46.0;
const ANDREIEF_NODES: usize = 120;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MomentMethod {
    Gamma,
    Bessel,
    Quadrature,
}

fn check_params(alpha: f64, s: f64) -> Result<()> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::Domain { function: "moment", value: alpha, expected: "alpha >= 0" });
    }
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::Domain { function: "moment", value: s, expected: "s >= 0" });
    }
    Ok(())
}

/// `mu_k = int_0^inf y^(alpha+k) e^{-y - s/y} dy`: `Gamma(alpha+k+1)` at `s = 0`,
/// `2 s^(nu/2) K_nu(2 sqrt s)` with `nu = alpha+k+1` otherwise.
pub fn moment(alpha: f64, s: f64, k: usize) -> Result<(f64, MomentMethod)> {
    check_params(alpha, s)?;
    let nu = alpha + k as f64 + 1.0;
    if s == 0.0 {
        return Ok((gamma(nu), MomentMethod::Gamma));
    }
    let kv = bessel_k(nu, 2.0 * s.sqrt())?;
    Ok((2.0 * s.powf(nu / 2.0) * kv.value, MomentMethod::Bessel))
}

/// `int_0^inf y^(nu-1) e^{-a y - b/y} dy` on a rule in `v = log y` centred on the
/// maximum of the integrand.
pub fn peaked_rule(nu: f64, a: f64, b: f64) -> Result<QuadratureRule> {
    if !(a > 0.0 && b >= 0.0 && (nu > 0.0 || b > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "y^(nu-1) e^(-a y - b/y) is not integrable for nu={nu}, a={a}, b={b}"
        )));
    }
    let g = |v: f64| nu * v - a * v.exp() - b * (-v).exp();
    let peak = ((nu + (nu * nu + 4.0 * a * b).sqrt()) / (2.0 * a)).ln();
    let top = g(peak);
    let mut lo = peak - 0.5;
    while g(lo) > top - LOG_TAIL {
        lo -= 0.5;
    }
    let mut hi = peak + 0.5;
    while g(hi) > top - LOG_TAIL {
        hi += 0.5;
    }
    let panels = ((6.0 * (hi - lo)).ceil() as usize).max(4);
    exponential_rule(panels, 16, lo, hi)
}

/// `mu_k` by quadrature on `rule` (any rule on `(0, inf)`).
pub fn moment_quadrature(alpha: f64, s: f64, k: usize, rule: &QuadratureRule) -> Result<f64> {
    check_params(alpha, s)?;
    let p = alpha + k as f64;
    Ok(rule.integrate(|y| (p * y.ln() - y - s / y).exp()))
}

/// Rule on which [`moment_quadrature`] resolves `mu_k` to roundoff.
pub fn moment_rule(alpha: f64, s: f64, k: usize) -> Result<QuadratureRule> {
    check_params(alpha, s)?;
    peaked_rule(alpha + k as f64 + 1.0, 1.0, s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentTable {
    pub alpha: f64,
    pub s: f64,
    pub moments: Vec<f64>,
    pub methods: Vec<MomentMethod>,
}

impl MomentTable {
    /// Moments `mu_0 .. mu_{count-1}`.
    pub fn new(alpha: f64, s: f64, count: usize) -> Result<Self> {
        let mut moments = Vec::with_capacity(count);
        let mut methods = Vec::with_capacity(count);
        for k in 0..count {
            let (m, how) = moment(alpha, s, k)?;
            moments.push(m);
            methods.push(how);
        }
        Ok(Self { alpha, s, moments, methods })
    }

    /// Recomputes every entry by quadrature.
    pub fn by_quadrature(alpha: f64, s: f64, count: usize) -> Result<Self> {
        let moments = (0..count)
            .map(|k| moment_quadrature(alpha, s, k, &moment_rule(alpha, s, k)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { alpha, s, moments, methods: vec![MomentMethod::Quadrature; count] })
    }

    /// Largest `mu_k^2 / (mu_{k-1} mu_{k+1})`; at most 1 for a positive weight.
    pub fn log_convexity_ratio(&self) -> f64 {
        self.moments
            .windows(3)
            .map(|w| w[1] * w[1] / (w[0] * w[2]))
            .fold(0.0, f64::max)
    }

    /// Hankel matrix `[mu_{j+k}]_{j,k<n}`; needs `2n-1` moments.
    pub fn hankel_matrix(&self, n: usize) -> Result<DMatrix<f64>> {
        if 2 * n > self.moments.len() + 1 {
            return Err(Error::InvalidParameter(format!(
                "order {n} needs {} moments, table has {}",
                2 * n - 1,
                self.moments.len()
            )));
        }
        Ok(DMatrix::from_fn(n, n, |j, k| self.moments[j + k]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HankelDetResult {
    pub n: usize,
    pub log_det: f64,
    pub sign: f64,
    /// 2-norm condition number of the moment matrix.
    pub condition: f64,
    pub min_eigenvalue: f64,
}

impl HankelDetResult {
    pub fn value(&self) -> f64 {
        self.sign * self.log_det.exp()
    }

    pub fn well_conditioned(&self) -> bool {
        self.condition <= CONDITION_WARN
    }
}

/// `D_n(s) = det[mu_{j+k}]_{j,k=0}^{n-1}` in log scale.
///
/// The matrix is equilibrated by its diagonal before factorization; the
/// diagonal product is added back in log scale.
pub fn hankel_det(alpha: f64, s: f64, n: usize) -> Result<HankelDetResult> {
    if n == 0 || n > MAX_ORDER {
        return Err(Error::InvalidParameter(format!("order n = {n} outside 1..={MAX_ORDER}")));
    }
    let table = MomentTable::new(alpha, s, 2 * n - 1)?;
    det_from_table(&table, n)
}

pub fn det_from_table(table: &MomentTable, n: usize) -> Result<HankelDetResult> {
    let m = table.hankel_matrix(n)?;
    let d: Vec<f64> = (0..n).map(|i| m[(i, i)].sqrt()).collect();
    let scaled = DMatrix::from_fn(n, n, |i, j| m[(i, j)] / (d[i] * d[j]));
    let det = linalg::log_det(scaled.clone());
    let log_diag: f64 = d.iter().map(|v| 2.0 * v.ln()).sum();
    let condition = linalg::condition_number(&m);
    let min_eigenvalue = linalg::symmetric_eigenvalues(&m)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if condition > CONDITION_WARN {
        warn!("hankel_det: moment matrix of order {n} has condition {condition:.3e}");
    }
    if det.zero || det.real() <= 0.0 {
        return Err(Error::NearSingular { condition });
    }
    Ok(HankelDetResult {
        n,
        log_det: det.log_abs + log_diag,
        sign: 1.0,
        condition,
        min_eigenvalue,
    })
}

/// `log( G(n+1) G(n+alpha+1) / G(alpha+1) )`.
pub fn barnes_formula_log(alpha: f64, n: usize) -> Result<f64> {
    let n = n as f64;
    Ok(barnes_g_log(n + 1.0)? + barnes_g_log(n + alpha + 1.0)? - barnes_g_log(alpha + 1.0)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarnesCheck {
    pub alpha: f64,
    pub n: usize,
    pub log_det: f64,
    pub log_formula: f64,
    pub condition: f64,
    /// `|D_n(0) / formula - 1|`.
    pub relative_residual: f64,
}

pub fn barnes_formula_check(alpha: f64, n: usize) -> Result<BarnesCheck> {
    let det = hankel_det(alpha, 0.0, n)?;
    let log_formula = barnes_formula_log(alpha, n)?;
    Ok(BarnesCheck {
        alpha,
        n,
        log_det: det.log_det,
        log_formula,
        condition: det.condition,
        relative_residual: (det.log_det - log_formula).exp_m1().abs(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AndreiefReport {
    pub n: usize,
    pub t: f64,
    /// `det[(-1)^(j+k) K_1^(j+k)(t)]_{j,k<n}`.
    pub lhs: f64,
    /// The `n`-fold cosh integral on a tensor Gauss-Legendre grid.
    pub rhs: f64,
    pub relative_residual: f64,
}

/// Andreief identity for `alpha = 0` at `n = 1, 2`.
pub fn andreief_check(n: usize, t: f64) -> Result<AndreiefReport> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain { function: "andreief_check", value: t, expected: "t > 0" });
    }
    if n == 0 || n > 2 {
        return Err(Error::Unsupported(format!("Andreief check for n = {n} (only 1, 2)")));
    }
    // (-1)^m K_1^(m)(t) = int e^{-t cosh u} cosh^{m+1} u du
    let c = |m: u32| cosh_moment(m + 1, t).map(|v| v.value);
    let lhs = if n == 1 { c(0)? } else { c(0)? * c(2)? - c(1)? * c(1)? };

    // e^{-t(cosh U - 1)} = e^{-40} at the cut
    let u_max = (1.0 + 40.0 / t).acosh();
    let rule = gauss_legendre(ANDREIEF_NODES, 0.0, u_max)?;
    let g: Vec<(f64, f64)> = rule
        .nodes()
        .iter()
        .zip(rule.weights())
        .map(|(&u, &w)| (u.cosh(), w * (-t * u.cosh()).exp() * u.cosh()))
        .collect();
    let rhs = if n == 1 {
        g.iter().map(|(_, w)| w).sum()
    } else {
        let mut acc = 0.0;
        for &(c1, w1) in &g {
            for &(c2, w2) in &g {
                acc += (c1 - c2).powi(2) * w1 * w2;
            }
        }
        acc / 2.0
    };
    Ok(AndreiefReport { n, t, lhs, rhs, relative_residual: ((lhs - rhs) / lhs).abs() })
}

/// `(K_1(t), int_0^1 e^{-t(2/x - 1)} x^{-2} (2 - x) / sqrt(1 - x) dx)`: the
/// substitution `x = 2/(1 + cosh u)` at `n = 1`. The `x` integral is taken with
/// `x = 1 - v^2` to remove the endpoint singularity.
pub fn change_of_variables_check(t: f64) -> Result<(f64, f64)> {
    let k1 = bessel_k1(t)?.value;
    let rule = gauss_legendre(200, 0.0, 1.0)?;
    let rhs = rule.integrate(|v| {
        let x = 1.0 - v * v;
        if x <= 0.0 {
            return 0.0;
        }
        2.0 * (-t * (2.0 / x - 1.0)).exp() * (2.0 - x) / (x * x)
    });
    Ok((k1, rhs))
}

/// `(int_0^inf e^{-x y - s/y} dy, sqrt(4s/x) K_1(2 sqrt(s x)))`.
pub fn scattering_bessel_form(s: f64, x: f64) -> Result<(f64, f64)> {
    if !(s > 0.0 && x > 0.0) {
        return Err(Error::Domain {
            function: "scattering_bessel_form",
            value: s.min(x),
            expected: "s, x > 0",
        });
    }
    let rule = peaked_rule(1.0, x, s)?;
    let quad = rule.integrate(|y| (-x * y - s / y).exp());
    let closed = (4.0 * s / x).sqrt() * bessel_k1(2.0 * (s * x).sqrt())?.value;
    Ok((quad, closed))
}

/// Central differences `(d/ds, d^2/ds^2) log D_n(s)` with step `h`.
pub fn log_det_derivatives(alpha: f64, n: usize, s: f64, h: f64) -> Result<(f64, f64)> {
    if !(h > 0.0 && s - h >= 0.0) {
        return Err(Error::InvalidParameter(format!("step {h} at s = {s}")));
    }
    let l = |s: f64| hankel_det(alpha, s, n).map(|d| d.log_det);
    let (lm, l0, lp) = (l(s - h)?, l(s)?, l(s + h)?);
    Ok(((lp - lm) / (2.0 * h), (lp - 2.0 * l0 + lm) / (h * h)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_moment() {
        let (m, how) = moment(0.0, 0.0, 3).unwrap();
        assert_eq!(how, MomentMethod::Gamma);
        assert!((m - 6.0).abs() < 1e-10);
    }

    #[test]
    fn order_limits() {
        assert!(hankel_det(0.0, 0.0, 0).is_err());
        assert!(hankel_det(0.0, 0.0, MAX_ORDER + 1).is_err());
        assert!(andreief_check(3, 1.0).is_err());
    }
}
