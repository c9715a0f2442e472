//! The sinh-Gordon phase `S(x;t)`, the block system behind `V`, `W`, `U`, the
//! Gelfand-Levitan kernel, and the Airy example.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, log_det};
use crate::linsys::DiscreteLinearSystem;
use crate::operator::{build_hankel, ScatteringFamily, ScatteringSpec, TabulatedWeight};
use crate::specfun::{airy, halfline_rule, QuadratureRule};

/// Operators with spectral radius at or above this are rejected.
pub const NORM_THRESHOLD: f64 = 0.999;
const POWER_ITERATIONS: usize = 60;
const TAIL_CHECK: f64 = 200.0;
const TAIL_NODES: usize = 48;
const TAIL_SCALE: f64 = 4.0;

/// The Howland systems `(-A, B_t, C_t)` for one weight `h` and every `t > 0`.
#[derive(Debug, Clone)]
pub struct HowlandFamily {
    weight: TabulatedWeight,
}

/// Quantities at one `(x, t)` that share the factorizations of `I +- R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub x: f64,
    pub t: f64,
    pub s: f64,
    pub v: f64,
    pub w: f64,
}

/// Second-order mixed partial by the symmetric cross stencil.
pub fn cross_stencil<F: Fn(f64, f64) -> Result<f64>>(f: F, x: f64, t: f64, h: f64, k: f64) -> Result<f64> {
    Ok((f(x + h, t + k)? - f(x + h, t - k)? - f(x - h, t + k)? + f(x - h, t - k)?) / (4.0 * h * k))
}

/// Fourth-order central first derivative.
pub fn five_point<F: Fn(f64) -> Result<f64>>(f: F, x: f64, h: f64) -> Result<f64> {
    Ok((f(x - 2.0 * h)? - 8.0 * f(x - h)? + 8.0 * f(x + h)? - f(x + 2.0 * h)?) / (12.0 * h))
}

/// Fourth-order central second derivative.
pub fn five_point_second<F: Fn(f64) -> Result<f64>>(f: F, x: f64, h: f64) -> Result<f64> {
    Ok((-f(x - 2.0 * h)? + 16.0 * f(x - h)? - 30.0 * f(x)? + 16.0 * f(x + h)? - f(x + 2.0 * h)?)
        / (12.0 * h * h))
}

impl HowlandFamily {
    pub fn new(weight: TabulatedWeight) -> Self {
        Self { weight }
    }

    /// `h(y) = e^{-y}` on the default half-line rule with `n` nodes.
    pub fn exponential(n: usize) -> Result<Self> {
        Ok(Self::new(TabulatedWeight::from_fn(halfline_rule(n, 1.0)?, |y| (-y).exp())))
    }

    pub fn weight(&self) -> &TabulatedWeight {
        &self.weight
    }

    pub fn system(&self, t: f64) -> Result<DiscreteLinearSystem> {
        DiscreteLinearSystem::howland(&self.weight, t)
    }

    /// `R_(x;t)` after checking its spectral radius against [`NORM_THRESHOLD`].
    pub fn checked_r(&self, x: f64, t: f64) -> Result<DMatrix<f64>> {
        let r = self.system(t)?.resolvent_r(x);
        let norm = linalg::power_iteration_norm(&r, POWER_ITERATIONS);
        if norm >= NORM_THRESHOLD {
            return Err(Error::NormTooLarge {
                norm,
                threshold: NORM_THRESHOLD,
            });
        }
        Ok(r)
    }

    /// `S(x;t) = log det(I + R) - log det(I - R)`
    pub fn phase_s(&self, x: f64, t: f64) -> Result<f64> {
        let r = self.checked_r(x, t)?;
        phase_from_matrix(&r)
    }

    /// The same phase from the Hankel operator `Gamma_phi(x;t)` on `hankel_rule`.
    pub fn phase_s_gamma(&self, x: f64, t: f64, hankel_rule: QuadratureRule) -> Result<f64> {
        let spec = ScatteringSpec::new(ScatteringFamily::HowlandWeight {
            weight: self.weight.clone(),
            t,
        })?
        .with_shift(x)?;
        let gamma = build_hankel(&spec, hankel_rule)?;
        phase_from_matrix(gamma.matrix())
    }

    /// `S`, `V(x,x) = -C e (I - R^2)^{-1} e B` and `W(x,x) = C e (I - R^2)^{-1} R e B`.
    ///
    /// `(I - R^2)^{-1} = ((I - R)^{-1} + (I + R)^{-1})/2` and
    /// `(I - R^2)^{-1} R = ((I - R)^{-1} - (I + R)^{-1})/2`, so two solves suffice.
    pub fn point(&self, x: f64, t: f64) -> Result<PhasePoint> {
        let s = self.phase_s(x, t)?;
        let (v, w) = self.v_and_w(x, t)?;
        Ok(PhasePoint { x, t, s, v, w })
    }

    fn v_and_w(&self, x: f64, t: f64) -> Result<(f64, f64)> {
        let sys = self.system(t)?;
        let r = self.checked_r(x, t)?;
        let n = sys.dim();
        let eb = sys.eb(x);
        let ce = sys.ce(x);
        let sp = linalg::solve_vec(&(DMatrix::identity(n, n) + &r), &eb)?;
        let sm = linalg::solve_vec(&(DMatrix::identity(n, n) - &r), &eb)?;
        Ok((-0.5 * ce.dot(&(&sm + &sp)), 0.5 * ce.dot(&(&sm - &sp))))
    }

    pub fn v_diag(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.v_and_w(x, t)?.0)
    }

    pub fn w_diag(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.v_and_w(x, t)?.1)
    }

    /// `int_x^inf g(s, V(s,s)) ds` by a rational-map rule shifted to start at `x`.
    ///
    /// The tail must have decayed (`V^2 < 1e-16`) by `s = x + TAIL_CHECK`.
    fn tail_integral<G: Fn(f64, f64) -> f64>(&self, x: f64, t: f64, g: G) -> Result<f64> {
        let v_far = self.v_diag(x + TAIL_CHECK, t)?;
        if v_far * v_far >= 1e-16 {
            return Err(Error::NonDecayingTail(format!(
                "V(s,s)^2 = {:e} at s = {} (x = {x}, t = {t})",
                v_far * v_far,
                x + TAIL_CHECK
            )));
        }
        let rule = halfline_rule(TAIL_NODES, TAIL_SCALE)?.shifted(x);
        let mut sum = 0.0;
        for (&s, &w) in rule.nodes().iter().zip(rule.weights()) {
            sum += w * g(s, self.v_diag(s, t)?);
        }
        Ok(sum)
    }

    /// `(det(I - R_x^2), exp(-4 int_x^inf (s - x) V(s,s)^2 ds))`
    pub fn det_one_minus_gamma_sq(&self, x: f64, t: f64) -> Result<(f64, f64)> {
        let r = self.checked_r(x, t)?;
        let n = r.nrows();
        let lhs = log_det(DMatrix::identity(n, n) - &r * &r).real();
        let integral = self.tail_integral(x, t, |s, v| (s - x) * v * v)?;
        Ok((lhs, (-4.0 * integral).exp()))
    }

    /// `U(x) = exp(2 int_x^inf V(s,s) ds)`
    pub fn u_from_v(&self, x: f64, t: f64) -> Result<f64> {
        Ok((2.0 * self.tail_integral(x, t, |_, v| v)?).exp())
    }

    /// `max |U'' - qU| / |U|` with `U = e^{-S}`, `q = -4[A]` and second differences on the grid.
    pub fn schrodinger_u_residual(&self, t: f64, x_grid: &[f64]) -> Result<f64> {
        let h = uniform_step(x_grid, 3)?;
        if h > 0.1 {
            return Err(Error::Grid(format!("grid step {h} is coarser than 0.1")));
        }
        let sys = self.system(t)?;
        let u: Vec<f64> = x_grid
            .iter()
            .map(|&x| Ok((-self.phase_s(x, t)?).exp()))
            .collect::<Result<_>>()?;
        let mut worst = 0.0f64;
        for k in 1..x_grid.len() - 1 {
            let q = sys.at(x_grid[k])?.potential();
            let upp = (u[k + 1] - 2.0 * u[k] + u[k - 1]) / (h * h);
            worst = worst.max((upp - q * u[k]).abs() / u[k].abs());
        }
        Ok(worst)
    }

    /// `d^2 phi / dx dt - 2 phi` for the scattering function, by a fourth-order
    /// Richardson combination of cross stencils with steps `h` and `2h`.
    pub fn linear_counterpart_residual(&self, x: f64, t: f64, h: f64) -> Result<f64> {
        let phi = |x: f64, t: f64| Ok(self.weight.phi(x, t));
        let d1 = cross_stencil(phi, x, t, h, h)?;
        let d2 = cross_stencil(phi, x, t, 2.0 * h, 2.0 * h)?;
        Ok(((4.0 * d1 - d2) / 3.0 - 2.0 * self.weight.phi(x, t)).abs())
    }

    /// `S`, `V`, `W` and the sinh-Gordon residual on a grid of `(x, t)` points,
    /// the mixed partial taken with the cross stencil of step `step`.
    pub fn sinh_gordon_grid(&self, x_values: &[f64], t_values: &[f64], step: f64) -> Result<PhaseGrid> {
        if !(step > 0.0 && step <= 1e-2) {
            return Err(Error::Grid(format!("stencil step must lie in (0, 1e-2], got {step}")));
        }
        uniform_step(x_values, 1)?;
        uniform_step(t_values, 1)?;
        // every stencil point must be inside the invertibility region
        let mut offending = Vec::new();
        for &x in x_values {
            for &t in t_values {
                if t - step <= 0.0 {
                    offending.push((x, t));
                    continue;
                }
                if let Err(Error::NormTooLarge { .. }) = self.checked_r(x - step, t - step) {
                    offending.push((x, t));
                }
            }
        }
        if !offending.is_empty() {
            return Err(Error::Grid(format!(
                "grid points outside the region ||R|| < {NORM_THRESHOLD}: {offending:?}"
            )));
        }
        let (nx, nt) = (x_values.len(), t_values.len());
        let mut grid = PhaseGrid {
            x_values: x_values.to_vec(),
            t_values: t_values.to_vec(),
            step,
            s: vec![vec![0.0; nt]; nx],
            v_diag: vec![vec![0.0; nt]; nx],
            w_diag: vec![vec![0.0; nt]; nx],
            mixed: vec![vec![0.0; nt]; nx],
            residual_sg: vec![vec![0.0; nt]; nx],
        };
        for (i, &x) in x_values.iter().enumerate() {
            for (j, &t) in t_values.iter().enumerate() {
                let p = self.point(x, t)?;
                let mixed = cross_stencil(|x, t| self.phase_s(x, t), x, t, step, step)?;
                grid.s[i][j] = p.s;
                grid.v_diag[i][j] = p.v;
                grid.w_diag[i][j] = p.w;
                grid.mixed[i][j] = mixed;
                grid.residual_sg[i][j] = (mixed - 2.0 * (2.0 * p.s).sinh()).abs();
            }
        }
        Ok(grid)
    }
}

/// `log det(I + R) - log det(I - R)` for a given matrix `R`.
pub fn phase_from_matrix(r: &DMatrix<f64>) -> Result<f64> {
    let n = r.nrows();
    let plus = log_det(DMatrix::identity(n, n) + r).log_positive()?;
    let minus = log_det(DMatrix::identity(n, n) - r).log_positive()?;
    Ok(plus - minus)
}

fn uniform_step(grid: &[f64], min_len: usize) -> Result<f64> {
    if grid.len() < min_len.max(1) {
        return Err(Error::Grid(format!("need at least {min_len} grid points")));
    }
    if grid.len() == 1 {
        return Ok(0.0);
    }
    let h = grid[1] - grid[0];
    if !(h > 0.0) || grid.windows(2).any(|p| ((p[1] - p[0]) - h).abs() > 1e-9 * h.max(1.0)) {
        return Err(Error::Grid("grid must be uniform and increasing".into()));
    }
    Ok(h)
}

/// Phase values and sinh-Gordon residuals, indexed `[x index][t index]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseGrid {
    pub x_values: Vec<f64>,
    pub t_values: Vec<f64>,
    pub step: f64,
    pub s: Vec<Vec<f64>>,
    pub v_diag: Vec<Vec<f64>>,
    pub w_diag: Vec<Vec<f64>>,
    pub mixed: Vec<Vec<f64>>,
    pub residual_sg: Vec<Vec<f64>>,
}

impl PhaseGrid {
    pub fn max_residual(&self) -> f64 {
        self.residual_sg.iter().flatten().fold(0.0, |m, &r| m.max(r))
    }

    pub fn mean_residual(&self) -> f64 {
        let n = self.residual_sg.iter().map(Vec::len).sum::<usize>();
        self.residual_sg.iter().flatten().sum::<f64>() / n.max(1) as f64
    }
}

/// The block system `A^ = diag(A, A)`, `B^ = [[0, B], [B, 0]]`, `C^ = [[C, 0], [0, C]]`,
/// for which `R^_x = [[0, R_x], [R_x, 0]]` and `det(I + R^_x) = det(I - R_x^2)`.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    nodes: DVector<f64>,
    b_hat: DMatrix<f64>,
    c_hat: DMatrix<f64>,
}

/// Residuals of the Gelfand-Levitan checks at one `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GelfandLevitanReport {
    pub x: f64,
    /// `max |Phi^(x+y) + T^(x,y) + int_x^inf T^(x,z) Phi^(z+y) dz|` over the y grid
    pub substitution: f64,
    /// `|trace T^(x,x) - d/dx log det(I + R^_x)|`
    pub trace_identity: f64,
    /// `max |T_xx - T_yy + 2 (d/dx T(x,x)) T(x,y)|` over the y grid
    pub hyperbolic_pde: f64,
}

impl BlockSystem {
    pub fn new(sys: &DiscreteLinearSystem) -> Self {
        let n = sys.dim();
        let y = DVector::from_iterator(2 * n, sys.nodes().iter().chain(sys.nodes()).copied());
        let mut b_hat = DMatrix::zeros(2 * n, 2);
        let mut c_hat = DMatrix::zeros(2, 2 * n);
        for i in 0..n {
            b_hat[(n + i, 0)] = sys.b()[i];
            b_hat[(i, 1)] = sys.b()[i];
            c_hat[(0, i)] = sys.c()[i];
            c_hat[(1, n + i)] = sys.c()[i];
        }
        Self {
            nodes: y,
            b_hat,
            c_hat,
        }
    }

    fn dim(&self) -> usize {
        self.nodes.len()
    }

    fn scaled_rows(&self, m: &DMatrix<f64>, x: f64) -> DMatrix<f64> {
        DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| (-x * self.nodes[i]).exp() * m[(i, j)])
    }

    /// `R^_x`
    pub fn resolvent(&self, x: f64) -> DMatrix<f64> {
        let n = self.dim();
        let eb = self.scaled_rows(&self.b_hat, x);
        let ce = self.scaled_rows(&self.c_hat.transpose(), x);
        let bc = &eb * ce.transpose();
        DMatrix::from_fn(n, n, |i, j| bc[(i, j)] / (self.nodes[i] + self.nodes[j]))
    }

    /// `Phi^(s) = C^ e^{-sA^} B^`
    pub fn phi(&self, s: f64) -> DMatrix<f64> {
        &self.c_hat * self.scaled_rows(&self.b_hat, s)
    }

    /// `-C^ e^{-xA^} (I + R^_x)^{-1}`, the part of `T^(x, .)` that does not depend on `y`.
    fn left_factor(&self, x: f64) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let plus = DMatrix::identity(n, n) + self.resolvent(x);
        let ce = self.scaled_rows(&self.c_hat.transpose(), x);
        // (I + R^)^T = I + R^T; solve for the transpose
        Ok(-linalg::solve(&plus.transpose(), &ce)?.transpose())
    }

    /// `T^(x,y) = -C^ e^{-xA^} (I + R^_x)^{-1} e^{-yA^} B^`
    pub fn t_hat(&self, x: f64, y: f64) -> Result<DMatrix<f64>> {
        Ok(self.left_factor(x)? * self.scaled_rows(&self.b_hat, y))
    }

    pub fn log_det(&self, x: f64) -> Result<f64> {
        let n = self.dim();
        log_det(DMatrix::identity(n, n) + self.resolvent(x)).log_positive()
    }

    /// Substitution, trace and hyperbolic-PDE residuals; the `z` integral uses a
    /// half-line rule shifted to start at `x`.
    pub fn gelfand_levitan_check(&self, x: f64, y_grid: &[f64], z_nodes: usize) -> Result<GelfandLevitanReport> {
        let left = self.left_factor(x)?;
        let t_at = |y: f64| &left * self.scaled_rows(&self.b_hat, y);
        let z_rule = halfline_rule(z_nodes, 1.0)?.shifted(x);
        let mut substitution = 0.0f64;
        for &y in y_grid {
            let mut integral = DMatrix::zeros(2, 2);
            for (&z, &w) in z_rule.nodes().iter().zip(z_rule.weights()) {
                integral += t_at(z) * self.phi(z + y) * w;
            }
            let res = self.phi(x + y) + t_at(y) + integral;
            substitution = substitution.max(res.abs().max());
        }

        let h = 1e-3;
        let trace = t_at(x).trace();
        let dlog = five_point(|s| self.log_det(s), x, h)?;
        let trace_identity = (trace - dlog).abs();

        let hp = 1e-2;
        let diag = |s: f64| self.t_hat(s, s);
        let d_diag = (diag(x - 2.0 * hp)? - diag(x - hp)? * 8.0 + diag(x + hp)? * 8.0 - diag(x + 2.0 * hp)?)
            / (12.0 * hp);
        let mut hyperbolic_pde = 0.0f64;
        let t_xm2 = self.left_factor(x - 2.0 * hp)?;
        let t_xm1 = self.left_factor(x - hp)?;
        let t_xp1 = self.left_factor(x + hp)?;
        let t_xp2 = self.left_factor(x + 2.0 * hp)?;
        for &y in y_grid {
            let e = |yy: f64| self.scaled_rows(&self.b_hat, yy);
            let ey = e(y);
            let t0 = &left * &ey;
            let txx = (-(&t_xm2 * &ey) + (&t_xm1 * &ey) * 16.0 - &t0 * 30.0 + (&t_xp1 * &ey) * 16.0
                - (&t_xp2 * &ey))
                / (12.0 * hp * hp);
            let tyy = (-(&left * e(y - 2.0 * hp)) + (&left * e(y - hp)) * 16.0 - &t0 * 30.0
                + (&left * e(y + hp)) * 16.0
                - (&left * e(y + 2.0 * hp)))
                / (12.0 * hp * hp);
            let res = txx - tyy + &d_diag * &t0 * 2.0;
            hyperbolic_pde = hyperbolic_pde.max(res.abs().max());
        }
        Ok(GelfandLevitanReport {
            x,
            substitution,
            trace_identity,
            hyperbolic_pde,
        })
    }
}

/// One point of the Airy asymptotic check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AiryPoint {
    pub x: f64,
    /// `2V(x,x) = d/dx [log det(I + Gamma) - log det(I - Gamma)]`, `None` when skipped.
    pub two_v: Option<f64>,
    /// `2V(x,x) / (-2 Ai(x))`
    pub ratio: Option<f64>,
    pub notice: Option<String>,
}

/// Ratio of `2V(x,x)` for `phi(t) = Ai(t/2)` to its leading asymptotic `-2 Ai(x)`.
pub fn airy_asymptotic_check(x_list: &[f64], rule: &QuadratureRule) -> Result<Vec<AiryPoint>> {
    let phase = |x: f64| -> Result<f64> {
        let spec = ScatteringSpec::new(ScatteringFamily::AiryHalf)?.with_shift(x)?;
        let gamma = build_hankel(&spec, rule.clone())?;
        let norm = linalg::power_iteration_norm(gamma.matrix(), POWER_ITERATIONS);
        if norm >= NORM_THRESHOLD {
            return Err(Error::NormTooLarge {
                norm,
                threshold: NORM_THRESHOLD,
            });
        }
        phase_from_matrix(gamma.matrix())
    };
    let mut out = Vec::with_capacity(x_list.len());
    for &x in x_list {
        match five_point(phase, x, 1e-3) {
            Ok(two_v) => out.push(AiryPoint {
                x,
                two_v: Some(two_v),
                ratio: Some(two_v / (-2.0 * airy(x).value)),
                notice: None,
            }),
            Err(e @ Error::NormTooLarge { .. }) | Err(e @ Error::InvalidParameter(_)) => {
                log::warn!("Airy check skips x = {x}: {e}");
                out.push(AiryPoint {
                    x,
                    two_v: None,
                    ratio: None,
                    notice: Some(e.to_string()),
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
