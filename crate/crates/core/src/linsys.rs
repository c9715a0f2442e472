//! The linear system `(-A, B, C)` on a quadrature grid, the operators `R_x` and
//! `F_x = (I + R_x)^{-1}`, and the differential-ring calculus built on them.

use std::cell::OnceCell;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::operator::TabulatedWeight;
use crate::specfun::QuadratureRule;

/// Largest accepted 1-norm condition estimate of `I + R_x`.
pub const MAX_CONDITION: f64 = 1e12;
const RESONANCE_GUARD: f64 = 1e-8;

/// `A = diag(y)`, `B_i = sqrt(w_i) h(y_i) e^{-t/y_i}`, `C = B^T` for real `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLinearSystem {
    rule: QuadratureRule,
    b: DVector<f64>,
    c: DVector<f64>,
    t: f64,
}

impl DiscreteLinearSystem {
    /// The Howland realization of the weight `h` at time `t > 0`.
    pub fn howland(h: &TabulatedWeight, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("linear system needs t > 0, got {t}")));
        }
        let rule = h.rule().clone();
        let b = DVector::from_iterator(
            rule.len(),
            rule.nodes()
                .iter()
                .zip(rule.weights())
                .zip(h.values())
                .map(|((&y, &w), &hv)| w.sqrt() * hv * (-t / y).exp()),
        );
        Ok(Self {
            rule,
            c: b.clone(),
            b,
            t,
        })
    }

    /// A system with explicitly given input and output vectors (already weight-scaled).
    pub fn from_parts(rule: QuadratureRule, b: DVector<f64>, c: DVector<f64>, t: f64) -> Result<Self> {
        if b.len() != rule.len() || c.len() != rule.len() {
            return Err(Error::InvalidParameter("B and C must match the rule size".into()));
        }
        if rule.min_node() <= 0.0 {
            return Err(Error::InvalidParameter("A must be positive definite".into()));
        }
        Ok(Self { rule, b, c, t })
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn nodes(&self) -> &[f64] {
        self.rule.nodes()
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.rule.len()
    }

    /// Same `A` and `C`, new `B`.
    pub fn with_b(&self, b: DVector<f64>) -> Self {
        Self {
            b,
            ..self.clone()
        }
    }

    /// `(-A, B, -C)`, which takes `R_x` to `-R_x`.
    pub fn negated(&self) -> Self {
        Self {
            c: -&self.c,
            ..self.clone()
        }
    }

    /// `C e^{-xA} B`
    pub fn scattering(&self, x: f64) -> f64 {
        self.nodes()
            .iter()
            .enumerate()
            .map(|(i, &y)| self.c[i] * (-x * y).exp() * self.b[i])
            .sum()
    }

    /// `e^{-xA} B`
    pub fn eb(&self, x: f64) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            self.nodes().iter().enumerate().map(|(i, &y)| (-x * y).exp() * self.b[i]),
        )
    }

    /// `(C e^{-xA})^T`
    pub fn ce(&self, x: f64) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            self.nodes().iter().enumerate().map(|(i, &y)| (-x * y).exp() * self.c[i]),
        )
    }

    /// `(R_x)_ij = B_i C_j e^{-x(y_i + y_j)} / (y_i + y_j)`
    pub fn resolvent_r(&self, x: f64) -> DMatrix<f64> {
        let y = self.nodes();
        let eb = self.eb(x);
        let ce = self.ce(x);
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| eb[i] * ce[j] / (y[i] + y[j]))
    }

    /// `e^{-xA} B C e^{-xA} = -dR_x/dx`
    pub fn lyapunov_rhs(&self, x: f64) -> DMatrix<f64> {
        self.eb(x) * self.ce(x).transpose()
    }

    /// `A R_x + R_x A`
    pub fn lyapunov_lhs(&self, x: f64) -> DMatrix<f64> {
        let y = self.nodes();
        let r = self.resolvent_r(x);
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| (y[i] + y[j]) * r[(i, j)])
    }

    /// `log det(I + R_x)`; fails if the determinant is not positive.
    pub fn log_det(&self, x: f64) -> Result<f64> {
        linalg::det_identity_plus(&self.resolvent_r(x), 1.0).log_positive()
    }

    /// Forms `F_x` and the vectors the bracket needs.
    pub fn at(&self, x: f64) -> Result<RingContext<'_>> {
        let n = self.dim();
        let i_plus_r = DMatrix::identity(n, n) + self.resolvent_r(x);
        let f = linalg::inverse(&i_plus_r)?;
        let condition = i_plus_r.column_iter().map(|c| c.lp_norm(1)).fold(0.0, f64::max)
            * f.column_iter().map(|c| c.lp_norm(1)).fold(0.0, f64::max);
        if !(condition <= MAX_CONDITION) {
            return Err(Error::NearSingular { condition });
        }
        let eb = self.eb(x);
        let ce = self.ce(x);
        let right = &f * &eb;
        let left = f.transpose() * &ce;
        Ok(RingContext {
            sys: self,
            x,
            f,
            m: OnceCell::new(),
            left,
            right,
        })
    }

    /// Darboux addition `B -> (zeta I + sigma A)(zeta I - sigma A)^{-1} B`.
    pub fn darboux_transform(&self, zeta: f64, sigma: i8) -> Result<Self> {
        if !(zeta > 0.0 && zeta.is_finite()) {
            return Err(Error::InvalidParameter(format!("Darboux parameter must be > 0, got {zeta}")));
        }
        let s = match sigma {
            1 => 1.0,
            -1 => -1.0,
            _ => return Err(Error::InvalidParameter(format!("sigma must be +1 or -1, got {sigma}"))),
        };
        let mut b = self.b.clone();
        for (i, &y) in self.nodes().iter().enumerate() {
            let den = zeta - s * y;
            if den.abs() < RESONANCE_GUARD * zeta.max(1.0) {
                return Err(Error::Resonant {
                    zeta,
                    distance: den.abs(),
                });
            }
            b[i] *= (zeta + s * y) / den;
        }
        Ok(self.with_b(b))
    }
}

/// A value in the ring spanned by words in `A` and `F_x`, tied to the `x` it was formed at.
#[derive(Debug, Clone, PartialEq)]
pub struct RingElement {
    pub matrix: DMatrix<f64>,
    pub x_base: f64,
}

impl RingElement {
    pub fn scale(&self, s: f64) -> RingElement {
        RingElement {
            matrix: &self.matrix * s,
            x_base: self.x_base,
        }
    }
}

impl Add for &RingElement {
    type Output = RingElement;
    fn add(self, rhs: &RingElement) -> RingElement {
        RingElement {
            matrix: &self.matrix + &rhs.matrix,
            x_base: self.x_base,
        }
    }
}

impl Sub for &RingElement {
    type Output = RingElement;
    fn sub(self, rhs: &RingElement) -> RingElement {
        RingElement {
            matrix: &self.matrix - &rhs.matrix,
            x_base: self.x_base,
        }
    }
}

/// Ordinary operator composition.
impl Mul for &RingElement {
    type Output = RingElement;
    fn mul(self, rhs: &RingElement) -> RingElement {
        RingElement {
            matrix: &self.matrix * &rhs.matrix,
            x_base: self.x_base,
        }
    }
}

/// Everything that depends on `x` through `F_x`.
#[derive(Debug, Clone)]
pub struct RingContext<'a> {
    sys: &'a DiscreteLinearSystem,
    x: f64,
    f: DMatrix<f64>,
    /// `AF + FA - 2FAF`, formed on first use
    m: OnceCell<DMatrix<f64>>,
    /// `F^T e^{-xA} C^T`
    left: DVector<f64>,
    /// `F e^{-xA} B`
    right: DVector<f64>,
}

impl RingContext<'_> {
    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn system(&self) -> &DiscreteLinearSystem {
        self.sys
    }

    pub fn f(&self) -> RingElement {
        self.element(self.f.clone())
    }

    fn m(&self) -> &DMatrix<f64> {
        self.m.get_or_init(|| {
            let n = self.sys.dim();
            let y = self.sys.nodes();
            let f = &self.f;
            let af = DMatrix::from_fn(n, n, |i, j| y[i] * f[(i, j)]);
            let fa = DMatrix::from_fn(n, n, |i, j| f[(i, j)] * y[j]);
            &af + &fa - (f * &af) * 2.0
        })
    }

    /// `dF_x/dx = AF + FA - 2FAF`
    pub fn df_dx(&self) -> RingElement {
        self.element(self.m().clone())
    }

    pub fn element(&self, matrix: DMatrix<f64>) -> RingElement {
        RingElement {
            matrix,
            x_base: self.x,
        }
    }

    pub fn zero(&self) -> RingElement {
        let n = self.sys.dim();
        self.element(DMatrix::zeros(n, n))
    }

    pub fn identity(&self) -> RingElement {
        let n = self.sys.dim();
        self.element(DMatrix::identity(n, n))
    }

    /// `g(A)` for a scalar function `g`.
    pub fn function_of_a<G: Fn(f64) -> f64>(&self, g: G) -> RingElement {
        let d = DVector::from_iterator(self.sys.dim(), self.sys.nodes().iter().map(|&y| g(y)));
        self.element(DMatrix::from_diagonal(&d))
    }

    pub fn a(&self) -> RingElement {
        self.a_pow(1)
    }

    pub fn a_pow(&self, k: i32) -> RingElement {
        self.function_of_a(|y| y.powi(k))
    }

    fn check(&self, p: &RingElement) -> Result<()> {
        if p.x_base != self.x {
            return Err(Error::InvalidParameter(format!(
                "ring element formed at x = {} used at x = {}",
                p.x_base, self.x
            )));
        }
        if p.matrix.nrows() != self.sys.dim() || p.matrix.ncols() != self.sys.dim() {
            return Err(Error::InvalidParameter("ring element is not conformable with A".into()));
        }
        Ok(())
    }

    /// `[P] = C e^{-xA} F P F e^{-xA} B`
    pub fn bracket(&self, p: &RingElement) -> Result<f64> {
        self.check(p)?;
        Ok(self.left.dot(&(&p.matrix * &self.right)))
    }

    /// `[g(A)]` without forming the diagonal matrix.
    pub fn bracket_of_a<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        self.sys
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, &y)| self.left[i] * g(y) * self.right[i])
            .sum()
    }

    /// `P * Q = P (AF + FA - 2FAF) Q`
    pub fn star(&self, p: &RingElement, q: &RingElement) -> Result<RingElement> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.element(&p.matrix * self.m() * &q.matrix))
    }

    /// `dP = A(I - 2F)P + dP/dx + P(I - 2F)A`, given the explicit x-derivative `dP/dx`.
    pub fn derivation(&self, p: &RingElement, dp_dx: &RingElement) -> Result<RingElement> {
        self.check(p)?;
        self.check(dp_dx)?;
        let n = self.sys.dim();
        let y = self.sys.nodes();
        let g = DMatrix::identity(n, n) - &self.f * 2.0;
        let ag = DMatrix::from_fn(n, n, |i, j| y[i] * g[(i, j)]);
        let ga = DMatrix::from_fn(n, n, |i, j| g[(i, j)] * y[j]);
        Ok(self.element(&ag * &p.matrix + &dp_dx.matrix + &p.matrix * &ga))
    }

    /// `u = -4[A]`
    pub fn potential(&self) -> f64 {
        -4.0 * self.bracket_of_a(|y| y)
    }

    /// `f_l = (-1)^l 2 [A^{2l-1}]`, with `f_0 = 1`.
    pub fn kdv_term(&self, ell: u32) -> f64 {
        if ell == 0 {
            return 1.0;
        }
        let sign = if ell % 2 == 0 { 1.0 } else { -1.0 };
        sign * 2.0 * self.bracket_of_a(|y| y.powi(2 * ell as i32 - 1))
    }

    /// Partial sums of the Green-diagonal series and its closed form.
    pub fn green_diagonal_series(&self, lambda: f64, order: usize) -> Result<GreenSeries> {
        let y_max = self.sys.rule().max_node();
        if !(lambda < -1.5 * y_max * y_max) {
            return Err(Error::InvalidParameter(format!(
                "lambda = {lambda} must lie below -1.5 (max node)^2 = {}",
                -1.5 * y_max * y_max
            )));
        }
        let mut partial = 0.5;
        let mut increments = Vec::with_capacity(order);
        for m in 0..order {
            let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
            let term = sign * self.bracket_of_a(|y| y.powi(2 * m as i32 + 1)) / lambda.powi(m as i32 + 1);
            partial += term;
            increments.push(term);
        }
        let closed_form = 0.5 - self.bracket_of_a(|y| y / (lambda + y * y));
        Ok(GreenSeries {
            partial_sum: partial,
            closed_form,
            increments,
        })
    }

    /// Generating function of infinitesimal Darboux addition,
    /// `X = (2/sqrt(-lambda)) [A(I-2F)A(lambda+A^2)^{-1} + A(lambda+A^2)^{-1}(I-2F)A]`,
    /// which is `-(2/sqrt(-lambda)) d/dx` of the Green-diagonal closed form.
    pub fn infinitesimal_addition(&self, lambda: f64) -> Result<f64> {
        if !(lambda < 0.0) {
            return Err(Error::InvalidParameter(format!("lambda must be negative, got {lambda}")));
        }
        let p = self.function_of_a(|y| y / (lambda + y * y));
        let d = self.derivation(&p, &self.zero())?;
        Ok(2.0 / (-lambda).sqrt() * self.bracket(&d)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreenSeries {
    pub partial_sum: f64,
    pub closed_form: f64,
    pub increments: Vec<f64>,
}

fn uniform_step(grid: &[f64]) -> Result<f64> {
    if grid.len() < 5 {
        return Err(Error::Grid("need at least five grid points".into()));
    }
    let h = grid[1] - grid[0];
    if !(h > 0.0) {
        return Err(Error::Grid("grid must increase".into()));
    }
    if grid.windows(2).any(|p| ((p[1] - p[0]) - h).abs() > 1e-9 * h.max(1.0)) {
        return Err(Error::Grid("grid must be uniform".into()));
    }
    Ok(h)
}

/// Residuals of the stationary KdV recurrence
/// `f_l' + f_{l-1}'''/4 - u f_{l-1}' - u' f_{l-1}/2` for `l = 1..=ell_max`,
/// maximized over the grid interior; derivatives by central differences on the grid.
pub fn kdv_hierarchy_check(sys: &DiscreteLinearSystem, x_grid: &[f64], ell_max: u32) -> Result<Vec<f64>> {
    let h = uniform_step(x_grid)?;
    if h > 0.1 {
        return Err(Error::Grid(format!("grid step {h} is coarser than 0.1")));
    }
    if !(1..=3).contains(&ell_max) {
        return Err(Error::InvalidParameter(format!("ell_max must be 1..=3, got {ell_max}")));
    }
    let n = x_grid.len();
    let mut f = vec![vec![0.0; n]; ell_max as usize + 1];
    let mut u = vec![0.0; n];
    for (k, &x) in x_grid.iter().enumerate() {
        let ctx = sys.at(x)?;
        u[k] = ctx.potential();
        for ell in 0..=ell_max {
            f[ell as usize][k] = ctx.kdv_term(ell);
        }
    }
    let d1 = |v: &[f64], k: usize| (v[k + 1] - v[k - 1]) / (2.0 * h);
    let d3 = |v: &[f64], k: usize| {
        (v[k + 2] - 2.0 * v[k + 1] + 2.0 * v[k - 1] - v[k - 2]) / (2.0 * h * h * h)
    };
    Ok((1..=ell_max as usize)
        .map(|ell| {
            (2..n - 2)
                .map(|k| {
                    let (fl, fp) = (&f[ell], &f[ell - 1]);
                    (d1(fl, k) + 0.25 * d3(fp, k) - u[k] * d1(fp, k) - 0.5 * d1(&u, k) * fp[k]).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect())
}

/// `w_+ = -((u')^2 + 2i u'')/4` on a uniform grid (second-order differences,
/// one-sided at the ends).
pub fn mkdv_w_plus(u: &[f64], h: f64) -> Result<Vec<Complex64>> {
    let n = u.len();
    if n < 4 {
        return Err(Error::Grid("need at least four samples".into()));
    }
    if !(h > 0.0) {
        return Err(Error::Grid(format!("step must be positive, got {h}")));
    }
    let d1 = |k: usize| match k {
        0 => (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h),
        k if k == n - 1 => (3.0 * u[k] - 4.0 * u[k - 1] + u[k - 2]) / (2.0 * h),
        k => (u[k + 1] - u[k - 1]) / (2.0 * h),
    };
    let d2 = |k: usize| match k {
        0 => (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / (h * h),
        k if k == n - 1 => (2.0 * u[k] - 5.0 * u[k - 1] + 4.0 * u[k - 2] - u[k - 3]) / (h * h),
        k => (u[k + 1] - 2.0 * u[k] + u[k - 1]) / (h * h),
    };
    Ok((0..n)
        .map(|k| {
            let up = d1(k);
            Complex64::new(-0.25 * up * up, -0.5 * d2(k))
        })
        .collect())
}
