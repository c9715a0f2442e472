//! Nystrom discretization of integral operators on `L^2(0, inf)`, Hankel and
//! Howland operators, and their Fredholm determinants.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Determinant};
use crate::specfun::{airy, bessel_k1, halfline_rule, QuadratureRule};

/// A real function sampled on the nodes of a quadrature rule, e.g. the weight `h`
/// of a Howland system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TabulatedWeight {
    rule: QuadratureRule,
    values: Vec<f64>,
}

impl TabulatedWeight {
    pub fn from_fn<F: Fn(f64) -> f64>(rule: QuadratureRule, h: F) -> Self {
        let values = rule.nodes().iter().map(|&y| h(y)).collect();
        Self { rule, values }
    }

    pub fn from_values(rule: QuadratureRule, values: Vec<f64>) -> Result<Self> {
        if values.len() != rule.len() {
            return Err(Error::InvalidParameter(format!(
                "{} samples for a rule with {} nodes",
                values.len(),
                rule.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite weight sample".into()));
        }
        Ok(Self { rule, values })
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `phi(s; t) = int_0^inf exp(-s y - 2t/y) h(y)^2 dy` by the tabulation's rule.
    pub fn phi(&self, s: f64, t: f64) -> f64 {
        self.rule
            .nodes()
            .iter()
            .zip(self.rule.weights())
            .zip(&self.values)
            .map(|((&y, &w), &h)| w * h * h * (-s * y - 2.0 * t / y).exp())
            .sum()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Natural cubic spline, zero to the right of the last knot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = knots.len();
        if n < 3 || values.len() != n {
            return Err(Error::InvalidParameter(
                "spline needs at least three knots and one value per knot".into(),
            ));
        }
        if knots.windows(2).any(|p| !(p[0] < p[1])) {
            return Err(Error::InvalidParameter("spline knots must increase strictly".into()));
        }
        // tridiagonal solve for the interior second derivatives
        let mut second = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = knots[i] - knots[i - 1];
            let h1 = knots[i + 1] - knots[i];
            let rhs = 6.0 * ((values[i + 1] - values[i]) / h1 - (values[i] - values[i - 1]) / h0);
            let diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
            c[i] = h1 / diag;
            d[i] = (rhs - h0 * d[i - 1]) / diag;
        }
        for i in (1..n - 1).rev() {
            second[i] = d[i] - c[i] * second[i + 1];
        }
        Ok(Self {
            knots,
            values,
            second,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.knots.len();
        if t > self.knots[n - 1] {
            return 0.0;
        }
        let i = match self.knots.partition_point(|&k| k <= t) {
            0 => 0,
            p => (p - 1).min(n - 2),
        };
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - t) / h;
        let b = (t - self.knots[i]) / h;
        a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h
                / 6.0
    }
}

/// The scattering functions this crate knows how to evaluate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ScatteringFamily {
    Zero,
    /// `phi(s) = int exp(-s y - 2t/y) h(y)^2 dy`
    HowlandWeight { weight: TabulatedWeight, t: f64 },
    /// `phi(u) = 2 sqrt(s/u) K_1(2 sqrt(s u))`, the `h = 1` Howland weight at `t = s/2`.
    BesselK1 { s: f64 },
    /// `phi(t) = Ai(t/2)`
    AiryHalf,
    /// `phi(t) = exp(-c t)`
    RankOneExp { c: f64 },
    Tabulated(CubicSpline),
}

/// A scattering function together with the shift `x`, `phi_(x)(t) = phi(t + 2x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatteringSpec {
    pub family: ScatteringFamily,
    shift: f64,
}

/// Two-resolution estimate of `int_0^inf t phi_(x)(t)^2 dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HsEstimate {
    pub value: f64,
    pub relative_change: f64,
}

const HS_REJECT: f64 = 1e-2;
const HS_WARN: f64 = 1e-6;

impl ScatteringSpec {
    pub fn new(family: ScatteringFamily) -> Result<Self> {
        match &family {
            ScatteringFamily::BesselK1 { s } if !(*s > 0.0) => {
                return Err(Error::InvalidParameter(format!("Bessel-K1 family needs s > 0, got {s}")))
            }
            ScatteringFamily::RankOneExp { c } if !(*c > 0.0) => {
                return Err(Error::InvalidParameter(format!("exponential family needs c > 0, got {c}")))
            }
            ScatteringFamily::HowlandWeight { t, .. } if !(*t >= 0.0) => {
                return Err(Error::InvalidParameter(format!("Howland weight needs t >= 0, got {t}")))
            }
            _ => {}
        }
        Ok(Self { family, shift: 0.0 })
    }

    pub fn with_shift(mut self, x: f64) -> Result<Self> {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(Error::InvalidParameter(format!("shift x must be >= 0, got {x}")));
        }
        self.shift = x;
        Ok(self)
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// The unshifted scattering function.
    pub fn base(&self, t: f64) -> f64 {
        match &self.family {
            ScatteringFamily::Zero => 0.0,
            ScatteringFamily::HowlandWeight { weight, t: time } => weight.phi(t, *time),
            ScatteringFamily::BesselK1 { s } => {
                let z = 2.0 * (s * t).sqrt();
                match bessel_k1(z) {
                    Ok(k) => 2.0 * (s / t).sqrt() * k.value,
                    Err(_) => f64::INFINITY,
                }
            }
            ScatteringFamily::AiryHalf => airy(0.5 * t).value,
            ScatteringFamily::RankOneExp { c } => (-c * t).exp(),
            ScatteringFamily::Tabulated(spline) => spline.eval(t),
        }
    }

    /// `phi_(x)(t) = phi(t + 2x)`
    pub fn phi(&self, t: f64) -> f64 {
        self.base(t + 2.0 * self.shift)
    }

    /// Rational-map scale that tracks the kernel decay of this family.
    pub fn default_scale(&self) -> f64 {
        match self.family {
            ScatteringFamily::BesselK1 { .. } if self.shift > 0.0 => 1.0 / self.shift.sqrt(),
            _ => 1.0,
        }
    }

    /// Hilbert-Schmidt criterion: `int t phi_(x)(t)^2 dt` at two resolutions.
    ///
    /// A relative change above 1e-2 between 200 and 400 nodes is taken as divergence;
    /// changes above 1e-6 are accepted with a warning.
    pub fn hs_estimate(&self) -> Result<HsEstimate> {
        let scale = self.default_scale();
        let integrand = |t: f64| {
            let p = self.phi(t);
            t * p * p
        };
        let coarse = halfline_rule(200, scale)?.integrate(integrand);
        let fine = halfline_rule(400, scale)?.integrate(integrand);
        if !(coarse.is_finite() && fine.is_finite()) {
            return Err(Error::DivergentHilbertSchmidt(
                "int t phi(t)^2 dt is not finite at the quadrature nodes".into(),
            ));
        }
        let relative_change = if fine == 0.0 {
            (fine - coarse).abs()
        } else {
            ((fine - coarse) / fine).abs()
        };
        if relative_change > HS_REJECT {
            return Err(Error::DivergentHilbertSchmidt(format!(
                "int t phi(t)^2 dt changes by {relative_change:.3e} (relative) when the rule doubles: {coarse} -> {fine}"
            )));
        }
        if relative_change > HS_WARN {
            log::warn!("Hilbert-Schmidt estimate is borderline: relative change {relative_change:.3e}");
        }
        Ok(HsEstimate {
            value: fine,
            relative_change,
        })
    }
}

/// Symmetrized Nystrom matrix `M_ij = sqrt(w_i) k(y_i, y_j) sqrt(w_j)` of an integral kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelOperator {
    rule: QuadratureRule,
    matrix: DMatrix<f64>,
    symmetric: bool,
}

impl KernelOperator {
    pub fn from_kernel<K: Fn(f64, f64) -> f64>(rule: QuadratureRule, symmetric: bool, k: K) -> Self {
        let n = rule.len();
        let sw = rule.sqrt_weights();
        let y = rule.nodes();
        let mut matrix = DMatrix::zeros(n, n);
        for j in 0..n {
            let start = if symmetric { j } else { 0 };
            for i in start..n {
                let v = sw[i] * k(y[i], y[j]) * sw[j];
                matrix[(i, j)] = v;
                if symmetric {
                    matrix[(j, i)] = v;
                }
            }
        }
        Self {
            rule,
            matrix,
            symmetric,
        }
    }

    /// Wraps an already-weighted matrix; symmetry is detected to 1e-13.
    pub fn from_matrix(rule: QuadratureRule, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != rule.len() || matrix.ncols() != rule.len() {
            return Err(Error::InvalidParameter("matrix size does not match the rule".into()));
        }
        let scale = linalg::max_abs(&matrix).max(f64::MIN_POSITIVE);
        let symmetric = linalg::max_abs(&(&matrix - matrix.transpose())) <= 1e-13 * scale;
        Ok(Self {
            rule,
            matrix,
            symmetric,
        })
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `det(I + lambda M)` by pivoted LU.
    pub fn fredholm_det(&self, lambda: f64) -> Determinant {
        linalg::det_identity_plus(&self.matrix, lambda)
    }

    pub fn fredholm_det_complex(&self, lambda: Complex64) -> Determinant {
        linalg::det_identity_plus_complex(&self.matrix, lambda)
    }

    /// `prod (1 + lambda mu_i)` over the eigenvalues of the symmetric matrix.
    pub fn eigenvalue_det(&self, lambda: f64) -> f64 {
        linalg::symmetric_eigenvalues(&self.matrix)
            .iter()
            .map(|mu| 1.0 + lambda * mu)
            .product()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::symmetric_eigenvalues(&self.matrix)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn hs_norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn operator_norm(&self) -> f64 {
        linalg::spectral_norm(&self.matrix)
    }
}

/// Hankel operator with kernel `phi(y + z + 2x)`.
pub fn build_hankel(spec: &ScatteringSpec, rule: QuadratureRule) -> Result<KernelOperator> {
    spec.hs_estimate()?;
    let op = KernelOperator::from_kernel(rule, true, |y, z| spec.phi(y + z));
    if op.matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::DivergentHilbertSchmidt(
            "kernel is not finite at the quadrature nodes".into(),
        ));
    }
    Ok(op)
}

/// Howland operator `h(y) h(z) / (y + z) exp(-x (y + z) - t (1/y + 1/z))` on the weight's rule.
pub fn build_howland(h: &TabulatedWeight, x: f64, t: f64) -> Result<KernelOperator> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::InvalidParameter(format!("Howland operator needs x >= 0, got {x}")));
    }
    if !(t > 0.0) {
        let near_zero = h.values.first().copied().unwrap_or(0.0);
        if near_zero.abs() > 1e-12 || t < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "Howland operator needs t > 0 unless h vanishes at the origin (t = {t}, h(y_min) = {near_zero})"
            )));
        }
    }
    let rule = h.rule.clone();
    let n = rule.len();
    let y = rule.nodes();
    let b: Vec<f64> = (0..n)
        .map(|i| rule.weights()[i].sqrt() * h.values[i] * (-x * y[i] - t / y[i]).exp())
        .collect();
    let matrix = DMatrix::from_fn(n, n, |i, j| b[i] * b[j] / (y[i] + y[j]));
    Ok(KernelOperator {
        rule,
        matrix,
        symmetric: true,
    })
}

/// `max_{lambda = +-1} |det(I + lambda Gamma_phi(x;t)) - det(I + lambda R_(x;t))|`,
/// with the Hankel side discretized on `hankel_rule` and the Howland side on the weight's rule.
pub fn det_equivalence_check(
    h: &TabulatedWeight,
    x: f64,
    t: f64,
    hankel_rule: QuadratureRule,
) -> Result<f64> {
    let howland = build_howland(h, x, t)?;
    let spec = ScatteringSpec::new(ScatteringFamily::HowlandWeight {
        weight: h.clone(),
        t,
    })?
    .with_shift(x)?;
    let hankel = build_hankel(&spec, hankel_rule)?;
    Ok([1.0, -1.0]
        .iter()
        .map(|&lambda| (hankel.fredholm_det(lambda).real() - howland.fredholm_det(lambda).real()).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spline_reproduces_cubic_interior_and_vanishes_to_the_right() {
        let knots: Vec<f64> = (0..=40).map(|k| k as f64 * 0.1).collect();
        let values: Vec<f64> = knots.iter().map(|t| (-t).exp()).collect();
        let s = CubicSpline::new(knots, values).unwrap();
        for &t in &[0.55, 1.23, 2.9, 3.7] {
            assert!((s.eval(t) - (-t).exp()).abs() < 1e-4);
        }
        assert_eq!(s.eval(4.5), 0.0);
        assert!(CubicSpline::new(vec![0.0, 1.0, 1.0], vec![1.0; 3]).is_err());
    }

    #[test]
    fn from_matrix_detects_symmetry() {
        let rule = halfline_rule(3, 1.0).unwrap();
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 2.0, 1.0, 0.0, 0.0, 0.0, 5.0]);
        assert!(KernelOperator::from_matrix(rule.clone(), m.clone()).unwrap().is_symmetric());
        let mut a = m;
        a[(0, 2)] = 1.0;
        assert!(!KernelOperator::from_matrix(rule, a).unwrap().is_symmetric());
    }

    #[test]
    fn howland_rejects_bad_parameters() {
        let h = TabulatedWeight::from_fn(halfline_rule(20, 1.0).unwrap(), |_| 1.0);
        assert!(build_howland(&h, 1.0, 0.0).is_err());
        assert!(build_howland(&h, -1.0, 1.0).is_err());
        let vanishing = TabulatedWeight::from_fn(halfline_rule(20, 1.0).unwrap(), |_| 0.0);
        assert!(build_howland(&vanishing, 1.0, 0.0).is_ok());
    }

    #[test]
    fn divergent_hs_is_rejected() {
        // phi ~ 1/t at the origin without a shift
        let spec = ScatteringSpec::new(ScatteringFamily::BesselK1 { s: 1.0 }).unwrap();
        assert!(matches!(
            spec.hs_estimate(),
            Err(Error::DivergentHilbertSchmidt(_))
        ));
        let shifted = spec.with_shift(0.5).unwrap();
        assert!(shifted.hs_estimate().is_ok());
    }
}
