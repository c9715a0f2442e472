//! Integrable kernels `k(z, w) = <J Psi(z), Psi(w)> / (z - w)` and their
//! representation as sums of products of Hankel operators.

use std::fmt;
use std::sync::Arc;

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::KernelOperator;
use crate::specfun::{halfline_rule, laguerre, laguerre_derivative, QuadratureRule};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>;

const DIAGONAL_GAP: f64 = 1e-12;
const DIFFERENCE_STEP: f64 = 1e-6;
const LAGUERRE_NODES: usize = 400;
const LAGUERRE_SCALE: f64 = 4.0;
const LAGUERRE_TOL: f64 = 1e-8;

/// Pole term `residue / (s - pole)^order` of a coefficient matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleTerm {
    pub pole: f64,
    pub order: u32,
    pub residue: DMatrix<f64>,
}

/// `Omega(s) = omega_inf s + omega_const + sum residue / (s - pole)^order`.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaData {
    pub omega_inf: DMatrix<f64>,
    pub omega_const: DMatrix<f64>,
    pub poles: Vec<PoleTerm>,
}

impl OmegaData {
    pub fn dim(&self) -> usize {
        self.omega_inf.nrows()
    }

    pub fn eval(&self, s: f64) -> DMatrix<f64> {
        let mut m = &self.omega_inf * s + &self.omega_const;
        for term in &self.poles {
            m += &term.residue / (s - term.pole).powi(term.order as i32);
        }
        m
    }

    fn validate(&self) -> Result<()> {
        let m = self.dim();
        let square = |a: &DMatrix<f64>| a.nrows() == m && a.ncols() == m;
        if !square(&self.omega_inf)
            || !square(&self.omega_const)
            || self.poles.iter().any(|p| !square(&p.residue))
        {
            return Err(Error::InvalidParameter("Omega blocks differ in shape".into()));
        }
        if self.poles.iter().any(|p| p.order == 0 || !p.pole.is_finite()) {
            return Err(Error::InvalidParameter("pole terms need order >= 1".into()));
        }
        Ok(())
    }

    /// Largest `|Omega(s) - Omega(s)^T|` over the samples.
    pub fn asymmetry(&self, samples: &[f64]) -> f64 {
        samples
            .iter()
            .map(|&s| {
                let o = self.eval(s);
                (&o - o.transpose()).amax()
            })
            .fold(0.0, f64::max)
    }
}

/// Standard symplectic matrix `[[0, -I], [I, 0]]` of size `2 half`.
pub fn symplectic_j(half: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * half, 2 * half);
    for i in 0..half {
        j[(i, half + i)] = -1.0;
        j[(half + i, i)] = 1.0;
    }
    j
}

#[derive(Clone)]
pub struct IntegrableKernelSpec {
    psi: VectorFn,
    psi_prime: Option<VectorFn>,
    j: DMatrix<f64>,
    omega: OmegaData,
}

impl fmt::Debug for IntegrableKernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntegrableKernelSpec")
            .field("m", &self.j.nrows())
            .field("analytic_derivative", &self.psi_prime.is_some())
            .field("omega", &self.omega)
            .finish()
    }
}

const OMEGA_SAMPLES: [f64; 4] = [0.37, 1.1, 2.9, 7.3];

impl IntegrableKernelSpec {
    pub fn new(
        psi: VectorFn,
        psi_prime: Option<VectorFn>,
        j: DMatrix<f64>,
        omega: OmegaData,
    ) -> Result<Self> {
        let m = j.nrows();
        if m == 0 || m % 2 != 0 || j.ncols() != m {
            return Err(Error::InvalidParameter(format!(
                "J must be square of even size, got {}x{}",
                j.nrows(),
                j.ncols()
            )));
        }
        if (&j + j.transpose()).amax() > 0.0 {
            return Err(Error::InvalidParameter("J is not antisymmetric".into()));
        }
        if (&j * &j + DMatrix::identity(m, m)).amax() > 0.0 {
            return Err(Error::InvalidParameter("J^2 != -I".into()));
        }
        if omega.dim() != m {
            return Err(Error::InvalidParameter(format!(
                "Omega is {}x{}, J is {m}x{m}",
                omega.dim(),
                omega.dim()
            )));
        }
        omega.validate()?;
        let asym = omega.asymmetry(&OMEGA_SAMPLES);
        if asym > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "Omega(s) is not symmetric (defect {asym:.3e})"
            )));
        }
        Ok(Self { psi, psi_prime, j, omega })
    }

    /// The Laguerre system of order `n`: `Psi = (u, u')` with
    /// `u(x) = exp(-x/2) x^((alpha+1)/2) L_n^(alpha)(x)`.
    pub fn laguerre(n: usize, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} < 0")));
        }
        let psi: VectorFn = Arc::new(move |x| {
            let (u, du, _) = laguerre_function(n, alpha, x);
            DVector::from_vec(vec![u, du])
        });
        let psi_prime: VectorFn = Arc::new(move |x| {
            let (_, du, d2u) = laguerre_function(n, alpha, x);
            DVector::from_vec(vec![du, d2u])
        });
        let diag = |a: f64, b: f64| DMatrix::from_diagonal(&DVector::from_vec(vec![a, b]));
        let omega = OmegaData {
            omega_inf: DMatrix::zeros(2, 2),
            omega_const: diag(-0.25, 1.0),
            poles: vec![
                PoleTerm {
                    pole: 0.0,
                    order: 1,
                    residue: diag((2 * n) as f64 / 2.0 + (alpha + 1.0) / 2.0, 0.0),
                },
                PoleTerm { pole: 0.0, order: 2, residue: diag((1.0 - alpha * alpha) / 4.0, 0.0) },
            ],
        };
        Self::new(psi, Some(psi_prime), symplectic_j(1), omega)
    }

    pub fn dim(&self) -> usize {
        self.j.nrows()
    }

    pub fn j(&self) -> &DMatrix<f64> {
        &self.j
    }

    pub fn omega(&self) -> &OmegaData {
        &self.omega
    }

    pub fn psi(&self, x: f64) -> DVector<f64> {
        (self.psi)(x)
    }

    /// `Psi'(x)`, analytic when supplied, otherwise a symmetric difference.
    pub fn psi_prime(&self, x: f64) -> DVector<f64> {
        match &self.psi_prime {
            Some(d) => d(x),
            None => self.psi_prime_difference(x),
        }
    }

    pub fn psi_prime_difference(&self, x: f64) -> DVector<f64> {
        let h = DIFFERENCE_STEP * x.abs().max(1.0);
        ((self.psi)(x + h) - (self.psi)(x - h)) / (2.0 * h)
    }

    /// `max |J Psi' - Omega Psi|` over the grid.
    pub fn ode_residual(&self, grid: &[f64]) -> f64 {
        grid.iter()
            .map(|&x| (&self.j * self.psi_prime(x) - self.omega.eval(x) * self.psi(x)).amax())
            .fold(0.0, f64::max)
    }

    /// `int_0^inf t |Psi(t)|^2 dt` by the rule; `Err` if the integrand has not
    /// decayed at the last node.
    pub fn moment(&self, rule: &QuadratureRule) -> Result<f64> {
        let f = |t: f64| t * self.psi(t).norm_squared();
        let value = rule.integrate(f);
        check_tail(value, rule, f, "t |Psi(t)|^2")?;
        Ok(value)
    }
}

/// `u`, `u'`, `u''` for `u(x) = exp(-x/2) x^p L_n^(alpha)(x)`, `p = (alpha+1)/2`.
pub fn laguerre_function(n: usize, alpha: f64, x: f64) -> (f64, f64, f64) {
    let p = (alpha + 1.0) / 2.0;
    let g = (-x / 2.0).exp() * x.powf(p);
    let r = -0.5 + p / x;
    let dg = g * r;
    let d2g = g * (r * r - p / (x * x));
    let l0 = laguerre(n, alpha, x);
    let l1 = laguerre_derivative(n, alpha, x, 1);
    let l2 = laguerre_derivative(n, alpha, x, 2);
    (g * l0, dg * l0 + g * l1, d2g * l0 + 2.0 * dg * l1 + g * l2)
}

/// `k(z, w) = <J Psi(z), Psi(w)> / (z - w)`; on the diagonal the limit
/// `<J Psi'(z), Psi(z)>`.
pub fn integrable_kernel(spec: &IntegrableKernelSpec, z: f64, w: f64) -> Result<f64> {
    if !z.is_finite() || !w.is_finite() {
        return Err(Error::Domain { function: "integrable_kernel", value: z, expected: "finite z, w" });
    }
    let value = if (z - w).abs() < DIAGONAL_GAP {
        if spec.psi_prime.is_none() {
            warn!("integrable_kernel: diagonal at z = {z} without derivative, using a symmetric difference");
        }
        let psi = spec.psi(z);
        (&spec.j * spec.psi_prime(z)).dot(&psi)
    } else {
        (&spec.j * spec.psi(z)).dot(&spec.psi(w)) / (z - w)
    };
    if !value.is_finite() {
        return Err(Error::Domain { function: "integrable_kernel", value: z, expected: "finite Psi" });
    }
    Ok(value)
}

#[derive(Clone)]
pub struct HankelPair {
    pub psi: ScalarFn,
    pub phi: ScalarFn,
}

/// `K = sum_j Gamma_{psi_j} Gamma_{phi_j}`.
#[derive(Clone, Default)]
pub struct HankelFactorization {
    pairs: Vec<HankelPair>,
}

impl fmt::Debug for HankelFactorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HankelFactorization").field("pairs", &self.pairs.len()).finish()
    }
}

impl HankelFactorization {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_pair(mut self, psi: ScalarFn, phi: ScalarFn) -> Self {
        self.pairs.push(HankelPair { psi, phi });
        self
    }

    pub fn exponential() -> Self {
        Self::new().with_pair(Arc::new(|t: f64| (-t).exp()), Arc::new(|t: f64| (-t).exp()))
    }

    /// Factorization of the Laguerre kernel with `alpha = 1`:
    /// `(d_z + d_w) k = -(n+1) u(z) u(w) / (z w)`, so `psi = (n+1) u/t`, `phi = u/t`.
    pub fn laguerre(n: usize) -> Self {
        let c = (n + 1) as f64;
        let u = move |t: f64| laguerre_function(n, 1.0, t).0 / t;
        Self::new().with_pair(Arc::new(move |t| c * u(t)), Arc::new(u))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[HankelPair] {
        &self.pairs
    }

    /// `max_j (int t psi_j^2, int t phi_j^2)`; `Err` when either tail has not
    /// decayed on the rule.
    pub fn hs_moment(&self, rule: &QuadratureRule) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for pair in &self.pairs {
            for f in [&pair.psi, &pair.phi] {
                let g = |t: f64| t * f(t) * f(t);
                let v = rule.integrate(g);
                check_tail(v, rule, g, "t psi(t)^2")?;
                worst = worst.max(v);
            }
        }
        Ok(worst)
    }

    /// `trace K = sum_j int_0^inf t psi_j(t) phi_j(t) dt`.
    pub fn trace(&self, rule: &QuadratureRule) -> f64 {
        self.pairs
            .iter()
            .map(|p| rule.integrate(|t| t * (p.psi)(t) * (p.phi)(t)))
            .sum()
    }

    /// Nystrom matrix of `K` on `rule`, the inner `u`-integral taken on `inner`.
    pub fn assemble(&self, rule: &QuadratureRule, inner: &QuadratureRule) -> Result<KernelOperator> {
        let n = rule.len();
        let m = inner.len();
        let sw = rule.sqrt_weights();
        let mut k = DMatrix::zeros(n, n);
        for pair in &self.pairs {
            let sample = |f: &ScalarFn| {
                DMatrix::from_fn(n, m, |i, l| {
                    sw[i] * f(rule.nodes()[i] + inner.nodes()[l]) * inner.weights()[l].sqrt()
                })
            };
            let p = sample(&pair.psi);
            let q = sample(&pair.phi);
            k += &p * q.transpose();
        }
        if k.iter().any(|v| !v.is_finite()) {
            return Err(Error::DivergentHilbertSchmidt("non-finite factor samples".into()));
        }
        KernelOperator::from_matrix(rule.clone(), k)
    }
}

fn check_tail<F: Fn(f64) -> f64>(value: f64, rule: &QuadratureRule, f: F, what: &str) -> Result<()> {
    let t = rule.max_node();
    let edge = f(t).abs() * t;
    if !value.is_finite() || !edge.is_finite() || edge > 1e-8 * (1.0 + value.abs()) {
        return Err(Error::NonDecayingTail(format!(
            "{what}: t f(t) = {edge:.3e} at the last node t = {t:.3e}"
        )));
    }
    Ok(())
}

/// `sum_j int_0^inf psi_j(z+u) phi_j(w+u) du` on `rule`.
pub fn hankel_product_kernel(
    fact: &HankelFactorization,
    z: f64,
    w: f64,
    rule: &QuadratureRule,
) -> Result<f64> {
    let mut total = 0.0;
    for pair in &fact.pairs {
        let f = |u: f64| (pair.psi)(z + u) * (pair.phi)(w + u);
        let v = rule.integrate(f);
        check_tail(v, rule, f, "psi(z+u) phi(w+u)")?;
        total += v;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaguerreIdentityReport {
    pub n: usize,
    pub z: f64,
    pub w: f64,
    /// Wronskian quotient `(u(z)u'(w) - u'(z)u(w)) / (z - w)`.
    pub lhs: f64,
    /// `int_0^inf u(z+t) u(w+t) / ((z+t)(w+t)) dt`.
    pub rhs: f64,
    pub ratio: f64,
    /// `|lhs - rhs| / (1 + |lhs|)` for the identity without a constant.
    pub printed_residual: f64,
    /// Same with `rhs` scaled by `n + 1`.
    pub corrected_residual: f64,
    pub tolerance: f64,
}

impl LaguerreIdentityReport {
    pub fn printed_passed(&self) -> bool {
        self.printed_residual <= self.tolerance
    }

    pub fn corrected_passed(&self) -> bool {
        self.corrected_residual <= self.tolerance
    }
}

/// Checks the Hankel-product form of the `alpha = 1` Laguerre kernel at `(z, w)`.
///
/// Sign convention: the Wronskian quotient is taken as
/// `(u(z)u'(w) - u'(z)u(w)) / (z - w)`, which makes both sides positive at
/// `(1, 2)` for `n = 1`. On the diagonal the quotient is `u'(z)^2 - u(z)u''(z)`.
pub fn laguerre_identity_check(n: usize, z: f64, w: f64) -> Result<LaguerreIdentityReport> {
    if !(z > 0.0 && w > 0.0) {
        return Err(Error::Domain { function: "laguerre_identity_check", value: z.min(w), expected: "z, w > 0" });
    }
    let spec = IntegrableKernelSpec::laguerre(n, 1.0)?;
    let lhs = integrable_kernel(&spec, z, w)?;
    let rule = halfline_rule(LAGUERRE_NODES, LAGUERRE_SCALE)?;
    let u = |x: f64| laguerre_function(n, 1.0, x).0 / x;
    let f = |t: f64| u(z + t) * u(w + t);
    let rhs = rule.integrate(f);
    check_tail(rhs, &rule, f, "Laguerre Hankel product")?;
    let scale = 1.0 + lhs.abs();
    let c = (n + 1) as f64;
    Ok(LaguerreIdentityReport {
        n,
        z,
        w,
        lhs,
        rhs,
        ratio: lhs / rhs,
        printed_residual: (lhs - rhs).abs() / scale,
        corrected_residual: (lhs - c * rhs).abs() / scale,
        tolerance: LAGUERRE_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AntidiagonalReport {
    pub j: usize,
    pub trace: i64,
    pub square_is_identity: bool,
    pub symmetric: bool,
    pub constant_on_cross_diagonals: bool,
    /// Residual of the divided-difference identity for `(z - a)^-j` at a sample.
    pub divided_difference_residual: f64,
}

/// Anti-identity `R` of size `j` (ones on the anti-diagonal).
pub fn antidiagonal(j: usize) -> DMatrix<i64> {
    DMatrix::from_fn(j, j, |r, c| i64::from(r + c + 1 == j))
}

/// `((z-a)^-j - (w-a)^-j)/(z-w)` against `-v(z)^T R v(w)` with
/// `v(s) = (1/(s-a), ..., 1/(s-a)^j)`.
pub fn divided_difference_residual(j: usize, a: f64, z: f64, w: f64) -> f64 {
    let jj = j as i32;
    let lhs = ((z - a).powi(-jj) - (w - a).powi(-jj)) / (z - w);
    let rhs: f64 = -(0..j)
        .map(|k| (z - a).powi(-(k as i32 + 1)) * (w - a).powi(-(jj - k as i32)))
        .sum::<f64>();
    (lhs - rhs).abs() / lhs.abs().max(1e-300)
}

pub fn antidiagonal_matrix_props(j: usize) -> Result<AntidiagonalReport> {
    if j == 0 {
        return Err(Error::InvalidParameter("j must be >= 1".into()));
    }
    let r = antidiagonal(j);
    let sq = &r * &r;
    let hankel = (0..j.saturating_sub(1))
        .all(|a| (1..j).all(|b| r[(a, b)] == r[(a + 1, b - 1)]));
    Ok(AntidiagonalReport {
        j,
        trace: r.trace(),
        square_is_identity: sq == DMatrix::identity(j, j),
        symmetric: r == r.transpose(),
        constant_on_cross_diagonals: hankel,
        divided_difference_residual: divided_difference_residual(j, -0.5, 1.3, 2.1),
    })
}

/// `max |J (u, u')' - diag(c(x), 1) (u, u')|` on the grid, with
/// `c(x) = (2n+alpha+1)/(2x) + (1-alpha^2)/(4x^2) - 1/4` and analytic derivatives.
pub fn laguerre_ode_residual(n: usize, alpha: f64, grid: &[f64]) -> Result<f64> {
    if let Some(&x) = grid.iter().find(|&&x| !(x > 0.0)) {
        return Err(Error::Domain { function: "laguerre_ode_residual", value: x, expected: "x > 0" });
    }
    Ok(IntegrableKernelSpec::laguerre(n, alpha)?.ode_residual(grid))
}
