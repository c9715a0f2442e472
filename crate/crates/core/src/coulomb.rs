//! Equilibrium measures of log-gas (Coulomb fluid) potentials: closed-form
//! densities, principal-value Hilbert transforms, the logarithmic energy and
//! Chebyshev variances of linear statistics.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::specfun::{chebyshev_first_kind, chebyshev_t, gauss_legendre, QuadratureRule};

const SUPPORT_NODES: usize = 400;
const MASS_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Potential {
    /// `u_0(x) = 2 xi (2/x - 1) + 2 log x`
    U0 { xi: f64 },
    /// `u_n(x) = t (2/x - 1) + 2n log x + log(1-x)/2 - log(2-x)` with `t = 2 n xi`
    UN { n: usize, xi: f64 },
    /// `v(z) = -alpha log z + sqrt(s x) (z + 1/z)`
    VSX { alpha: f64, s: f64, x: f64 },
}

impl Potential {
    pub fn value(&self, z: f64) -> f64 {
        match *self {
            Potential::U0 { xi } => 2.0 * xi * (2.0 / z - 1.0) + 2.0 * z.ln(),
            Potential::UN { n, xi } => {
                let t = 2.0 * n as f64 * xi;
                t * (2.0 / z - 1.0) + 2.0 * n as f64 * z.ln() + 0.5 * (1.0 - z).ln() - (2.0 - z).ln()
            }
            Potential::VSX { alpha, s, x } => -alpha * z.ln() + (s * x).sqrt() * (z + 1.0 / z),
        }
    }

    pub fn derivative(&self, z: f64) -> f64 {
        match *self {
            Potential::U0 { xi } => -4.0 * xi / (z * z) + 2.0 / z,
            Potential::UN { n, xi } => {
                let t = 2.0 * n as f64 * xi;
                -2.0 * t / (z * z) + 2.0 * n as f64 / z - 0.5 / (1.0 - z) + 1.0 / (2.0 - z)
            }
            Potential::VSX { alpha, s, x } => -alpha / z + (s * x).sqrt() * (1.0 - 1.0 / (z * z)),
        }
    }

    pub fn second_derivative(&self, z: f64) -> f64 {
        match *self {
            Potential::U0 { xi } => 8.0 * xi / z.powi(3) - 2.0 / (z * z),
            Potential::UN { n, xi } => {
                let t = 2.0 * n as f64 * xi;
                4.0 * t / z.powi(3) - 2.0 * n as f64 / (z * z) - 0.5 / (1.0 - z).powi(2)
                    + 1.0 / (2.0 - z).powi(2)
            }
            Potential::VSX { alpha, s, x } => alpha / (z * z) + 2.0 * (s * x).sqrt() / z.powi(3),
        }
    }

    /// Smallest `V''` over `samples` equally spaced points of `[a, b]`.
    pub fn min_curvature(&self, a: f64, b: f64, samples: usize) -> f64 {
        (0..=samples)
            .map(|i| self.second_derivative(a + (b - a) * i as f64 / samples as f64))
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_xi(xi: f64) -> Result<()> {
    if xi > 0.0 && xi < 0.5 {
        Ok(())
    } else {
        Err(Error::Domain { function: "endpoints_u0", value: xi, expected: "0 < xi < 1/2" })
    }
}

/// Endpoints in the form `4 pi xi / (2 pi - 1)^2 (2 pi -+ sqrt(4 pi - 1))`.
pub fn endpoints_u0(xi: f64) -> Result<(f64, f64)> {
    check_xi(xi)?;
    let c = 4.0 * PI * xi / (2.0 * PI - 1.0).powi(2);
    let r = (4.0 * PI - 1.0).sqrt();
    Ok((c * (2.0 * PI - r), c * (2.0 * PI + r)))
}

/// Endpoints in the form `2 pi^2 xi/(pi - 1/2)^2 -+ 2 pi xi/(pi - 1/2) sqrt(pi^2/(pi - 1/2)^2 - 1)`.
pub fn endpoints_u0_alt(xi: f64) -> Result<(f64, f64)> {
    check_xi(xi)?;
    let h = PI - 0.5;
    let c = 2.0 * PI * PI * xi / (h * h);
    let r = 2.0 * PI * xi / h * (PI * PI / (h * h) - 1.0).sqrt();
    Ok((c - r, c + r))
}

/// `xi` at which the right endpoint reaches 1.
pub fn critical_xi() -> f64 {
    (2.0 * PI - 1.0).powi(2) / (4.0 * PI * (2.0 * PI + (4.0 * PI - 1.0).sqrt()))
}

/// `(int_a^b V'/sqrt((b-x)(x-a)), int_a^b x V'/sqrt((b-x)(x-a)))`.
pub fn endpoint_constraints<F: Fn(f64) -> f64>(dv: F, a: f64, b: f64) -> Result<(f64, f64)> {
    let rule = chebyshev_first_kind(SUPPORT_NODES, a, b)?;
    Ok((rule.integrate(&dv), rule.integrate(|x| x * dv(x))))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EndpointSolution {
    pub a: f64,
    pub b: f64,
    pub iterations: usize,
    pub residual: (f64, f64),
}

/// Solves `int V'/sqrt = 0`, `int x V'/sqrt = moment` for `(a, b)` by Newton's
/// method in `(log a, log b)` with a difference Jacobian.
pub fn solve_endpoints<F: Fn(f64) -> f64>(
    dv: F,
    moment: f64,
    guess: (f64, f64),
) -> Result<EndpointSolution> {
    let residual = |p: (f64, f64)| -> Result<(f64, f64)> {
        let (a, b) = (p.0.exp(), p.1.exp());
        let (c0, c1) = endpoint_constraints(&dv, a, b)?;
        Ok((c0, c1 - moment))
    };
    if !(guess.0 > 0.0 && guess.1 > guess.0) {
        return Err(Error::RootFind(format!("bad initial interval {guess:?}")));
    }
    let mut p = (guess.0.ln(), guess.1.ln());
    let mut f = residual(p)?;
    let h = 1e-7;
    for it in 1..=100 {
        let fa = residual((p.0 + h, p.1))?;
        let fb = residual((p.0, p.1 + h))?;
        let j = [
            [(fa.0 - f.0) / h, (fb.0 - f.0) / h],
            [(fa.1 - f.1) / h, (fb.1 - f.1) / h],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::RootFind(format!("singular Jacobian at a={}, b={}", p.0.exp(), p.1.exp())));
        }
        let d0 = (j[1][1] * f.0 - j[0][1] * f.1) / det;
        let d1 = (-j[1][0] * f.0 + j[0][0] * f.1) / det;
        let mut lambda = 1.0;
        let norm = |r: (f64, f64)| r.0.hypot(r.1);
        loop {
            let q = (p.0 - lambda * d0, p.1 - lambda * d1);
            if q.1 > q.0 {
                if let Ok(g) = residual(q) {
                    if norm(g) < norm(f) || lambda < 1e-4 {
                        p = q;
                        f = g;
                        break;
                    }
                }
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                return Err(Error::RootFind(format!(
                    "line search stalled at a={}, b={}, residuals ({:.3e}, {:.3e})",
                    p.0.exp(),
                    p.1.exp(),
                    f.0,
                    f.1
                )));
            }
        }
        if norm(f) < 1e-13 * (1.0 + moment.abs()) || d0.hypot(d1) < 1e-15 {
            return Ok(EndpointSolution { a: p.0.exp(), b: p.1.exp(), iterations: it, residual: f });
        }
    }
    Err(Error::RootFind(format!(
        "no convergence after 100 Newton steps, residuals ({:.3e}, {:.3e})",
        f.0, f.1
    )))
}

/// `y = a + (b - a) sin^2 phi` Gauss-Legendre rule in `phi` on `[0, pi/2]`,
/// returned as a rule in `y`.
pub fn sin2_rule(a: f64, b: f64, n: usize) -> Result<QuadratureRule> {
    let base = gauss_legendre(n, 0.0, PI / 2.0)?;
    let nodes: Vec<f64> = base.nodes().iter().map(|p| a + (b - a) * p.sin().powi(2)).collect();
    let weights: Vec<f64> = base
        .nodes()
        .iter()
        .zip(base.weights())
        .map(|(p, w)| w * (b - a) * (2.0 * p).sin())
        .collect();
    QuadratureRule::from_parts(nodes, weights, a, b)
}

/// `p.v. int_a^b f(y) / (x - y) dy` for `a < x < b`, by subtracting `f(x)`
/// and adding `f(x) log((x-a)/(b-x))`.
pub fn principal_value<F: Fn(f64) -> f64>(f: F, x: f64, a: f64, b: f64, n: usize) -> Result<f64> {
    if !(a < x && x < b) {
        return Err(Error::Domain { function: "principal_value", value: x, expected: "a < x < b" });
    }
    let fx = f(x);
    let rule = sin2_rule(a, b, n)?;
    let smooth = rule.integrate(|y| if y == x { 0.0 } else { (f(y) - fx) / (x - y) });
    Ok(smooth + fx * ((x - a) / (b - x)).ln())
}

/// `2 pi H rho(x) = 2 p.v. int rho(y)/(x - y) dy` for `rho` supported on `[a, b]`.
pub fn two_pi_hilbert<F: Fn(f64) -> f64>(rho: F, x: f64, a: f64, b: f64) -> Result<f64> {
    Ok(2.0 * principal_value(rho, x, a, b, SUPPORT_NODES)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DensityKind {
    Sigma0 { xi: f64 },
    VSX { alpha: f64, s: f64, x: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumMeasure {
    pub a: f64,
    pub b: f64,
    pub kind: DensityKind,
    /// `int_a^b density`.
    pub mass: f64,
}

impl EquilibriumMeasure {
    pub fn sigma0(xi: f64) -> Result<Self> {
        let (a, b) = endpoints_u0(xi)?;
        let mut m = Self { a, b, kind: DensityKind::Sigma0 { xi }, mass: 0.0 };
        m.mass = m.integrate(|_| 1.0)?;
        Ok(m)
    }

    pub fn potential(&self) -> Potential {
        match self.kind {
            DensityKind::Sigma0 { xi } => Potential::U0 { xi },
            DensityKind::VSX { alpha, s, x } => Potential::VSX { alpha, s, x },
        }
    }

    /// The closed-form density; zero outside `(a, b)`.
    pub fn density(&self, z: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        if !(a < z && z < b) {
            return 0.0;
        }
        let root = ((b - z) * (z - a)).sqrt();
        let ab = a * b;
        match self.kind {
            DensityKind::Sigma0 { xi } => {
                root / (PI * ab.sqrt()) * (xi * (a + b) / (ab * z) + 2.0 * xi / (z * z) - 1.0 / z)
            }
            DensityKind::VSX { alpha, s, x } => {
                let k = (s * x).sqrt();
                root / (2.0 * PI * ab.sqrt())
                    * (alpha / z + k / (z * z) + k / (2.0 * z) * (1.0 / a + 1.0 / b))
            }
        }
    }

    /// `int_a^b g(z) density(z) dz` on the `sin^2` rule.
    pub fn integrate<G: Fn(f64) -> f64>(&self, g: G) -> Result<f64> {
        Ok(sin2_rule(self.a, self.b, SUPPORT_NODES)?.integrate(|z| g(z) * self.density(z)))
    }

    /// `max |2 pi H rho - V'|` at the given interior points.
    pub fn singular_integral_residual(&self, points: &[f64]) -> Result<f64> {
        let v = self.potential();
        let mut worst: f64 = 0.0;
        for &z in points {
            let h = two_pi_hilbert(|y| self.density(y), z, self.a, self.b)?;
            worst = worst.max((h - v.derivative(z)).abs());
        }
        Ok(worst)
    }

    /// Interior points at 20%, 50% and 80% of the support.
    pub fn probe_points(&self) -> [f64; 3] {
        let w = self.b - self.a;
        [self.a + 0.2 * w, self.a + 0.5 * w, self.b - 0.2 * w]
    }

    pub fn min_density(&self, samples: usize) -> f64 {
        (1..samples)
            .map(|i| self.density(self.a + (self.b - self.a) * i as f64 / samples as f64))
            .fold(f64::INFINITY, f64::min)
    }

    /// `int log|z - y| rho(y) dy` for real `z` outside `[a, b]`.
    pub fn log_potential(&self, z: f64) -> Result<f64> {
        if self.a <= z && z <= self.b {
            return Err(Error::Domain { function: "log_potential", value: z, expected: "z outside [a, b]" });
        }
        self.integrate(|y| (z - y).abs().ln())
    }
}

/// `sigma_0(x)` for the closed-form endpoints.
pub fn sigma0_density(xi: f64, x: f64) -> Result<f64> {
    Ok(EquilibriumMeasure::sigma0(xi)?.density(x))
}

/// First-order correction `rho_tilde` for `u_n = n u_0 + f`.
pub fn correction_rho_tilde(xi: f64, x: f64) -> Result<f64> {
    let (a, b) = endpoints_u0(xi)?;
    if b >= 1.0 {
        return Err(Error::Domain {
            function: "correction_rho_tilde",
            value: xi,
            expected: "xi below the critical value where b = 1",
        });
    }
    if !(a < x && x < b) {
        return Ok(0.0);
    }
    let root = ((b - x) * (x - a)).sqrt();
    Ok(1.0 / (4.0 * PI * root)
        * (((1.0 - a) * (1.0 - b)).sqrt() / (1.0 - x)
            + 1.0
            + 2.0 * ((2.0 - a) * (2.0 - b)).sqrt() / (x - 2.0)))
}

/// `rho_tilde(x)` from its defining principal value
/// `1/(2 pi^2 sqrt((b-x)(x-a))) p.v. int sqrt((b-y)(y-a)) f'(y)/(y - x) dy`.
pub fn correction_rho_tilde_pv(xi: f64, x: f64) -> Result<f64> {
    let (a, b) = endpoints_u0(xi)?;
    if b >= 1.0 {
        return Err(Error::Domain { function: "correction_rho_tilde_pv", value: xi, expected: "b < 1" });
    }
    let df = |y: f64| -0.5 / (1.0 - y) + 1.0 / (2.0 - y);
    let g = |y: f64| ((b - y) * (y - a)).max(0.0).sqrt() * df(y);
    let pv = -principal_value(g, x, a, b, SUPPORT_NODES)?;
    Ok(pv / (2.0 * PI * PI * ((b - x) * (x - a)).sqrt()))
}

/// `int_a^b rho_tilde` on the arcsine-weight rule.
pub fn rho_tilde_integral(xi: f64) -> Result<f64> {
    let (a, b) = endpoints_u0(xi)?;
    let rule = chebyshev_first_kind(SUPPORT_NODES, a, b)?;
    rule.nodes()
        .iter()
        .zip(rule.weights())
        .map(|(&x, &w)| Ok(w * correction_rho_tilde(xi, x)? * ((b - x) * (x - a)).sqrt()))
        .sum()
}

/// Piecewise-constant density: cell centres, widths and values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityGrid {
    pub nodes: Vec<f64>,
    pub widths: Vec<f64>,
    pub values: Vec<f64>,
}

impl DensityGrid {
    /// `cells` equal cells of `[a, b]` holding the cell averages of `f`
    /// (4-point Gauss-Legendre per cell).
    pub fn uniform<F: Fn(f64) -> f64>(a: f64, b: f64, cells: usize, f: F) -> Self {
        const U: [f64; 4] = [-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526];
        const W: [f64; 4] = [0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538];
        let dx = (b - a) / cells as f64;
        let nodes: Vec<f64> = (0..cells).map(|i| a + (i as f64 + 0.5) * dx).collect();
        let values = nodes
            .iter()
            .map(|&x| U.iter().zip(&W).map(|(u, w)| w * f(x + 0.5 * dx * u)).sum::<f64>() / 2.0)
            .collect();
        Self { nodes, widths: vec![dx; cells], values }
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().zip(&self.widths).map(|(v, w)| v * w).sum()
    }

    pub fn normalized(mut self) -> Self {
        let m = self.mass();
        self.values.iter_mut().for_each(|v| *v /= m);
        self
    }

    pub fn masses(&self) -> Vec<f64> {
        self.values.iter().zip(&self.widths).map(|(v, w)| v * w).collect()
    }
}

/// `Phi(u) = u^2 log|u| / 2 - 3u^2/4`, the second antiderivative of `log|u|`.
fn log_antiderivative2(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u * u * (0.5 * u.abs().ln() - 0.75)
    }
}

/// Mean of `log(1/|x - y|)` over `x` in cell `(ci, wi)` and `y` in cell `(cj, wj)`
/// (centre, width). Exact for nearby cells; far cells use the midpoint value
/// plus its second-order correction.
pub fn cell_log_interaction(ci: f64, wi: f64, cj: f64, wj: f64) -> f64 {
    let d = (ci - cj).abs();
    if d > 10.0 * wi.max(wj) {
        return -d.ln() + (wi * wi + wj * wj) / (24.0 * d * d);
    }
    let (ai, bi) = (ci - wi / 2.0, ci + wi / 2.0);
    let (aj, bj) = (cj - wj / 2.0, cj + wj / 2.0);
    let phi = log_antiderivative2;
    -(phi(bi - aj) - phi(ai - aj) - phi(bi - bj) + phi(ai - bj)) / (wi * wj)
}

/// `sum V(x_i) m_i + sum_{i,j} L_ij m_i m_j` with `L_ij` the exact mean of
/// `log(1/|x-y|)` over cells `i`, `j`.
pub fn discrete_energy<V: Fn(f64) -> f64>(v: V, nodes: &[f64], widths: &[f64], masses: &[f64]) -> f64 {
    let n = nodes.len();
    let mut e = 0.0;
    for i in 0..n {
        e += v(nodes[i]) * masses[i];
        for j in 0..n {
            e += cell_log_interaction(nodes[i], widths[i], nodes[j], widths[j]) * masses[i] * masses[j];
        }
    }
    e
}

/// `E_V(rho) = int V rho + int int log(1/|x-y|) rho(x) rho(y)`.
pub fn energy_functional(v: &Potential, density: &DensityGrid) -> Result<f64> {
    let mass = density.mass();
    if (mass - 1.0).abs() > MASS_TOL {
        return Err(Error::NotNormalized { mass });
    }
    if density.values.iter().any(|&r| r < -1e-10) {
        return Err(Error::InvalidParameter("negative density".into()));
    }
    Ok(discrete_energy(|x| v.value(x), &density.nodes, &density.widths, &density.masses()))
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(y: &mut [f64]) {
    let mut u = y.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cum += uk;
        let t = (cum - 1.0) / (k + 1) as f64;
        if uk - t > 0.0 {
            theta = t;
        }
    }
    y.iter_mut().for_each(|v| *v = (*v - theta).max(0.0));
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationalResult {
    pub nodes: Vec<f64>,
    pub masses: Vec<f64>,
    pub energy: f64,
    pub iterations: usize,
}

/// Minimizes the discrete energy over masses on `cells` equal cells of
/// `[lo, hi]` by projected gradient descent.
pub fn discrete_minimizer(
    v: &Potential,
    lo: f64,
    hi: f64,
    cells: usize,
    iterations: usize,
    step: f64,
) -> Result<VariationalResult> {
    if cells < 2 || !(hi > lo) {
        return Err(Error::InvalidParameter("need at least two cells on a proper interval".into()));
    }
    let dx = (hi - lo) / cells as f64;
    let nodes: Vec<f64> = (0..cells).map(|i| lo + (i as f64 + 0.5) * dx).collect();
    let widths = vec![dx; cells];
    let pot: Vec<f64> = nodes.iter().map(|&x| v.value(x)).collect();
    if pot.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidParameter("potential is not finite on the grid".into()));
    }
    let kernel = DMatrix::from_fn(cells, cells, |i, j| cell_log_interaction(nodes[i], dx, nodes[j], dx));
    let mut m = vec![1.0 / cells as f64; cells];
    for _ in 0..iterations {
        let mv = nalgebra::DVector::from_column_slice(&m);
        let km = &kernel * mv;
        for i in 0..cells {
            m[i] -= step * (pot[i] + 2.0 * km[i]);
        }
        project_simplex(&mut m);
    }
    let energy = discrete_energy(|x| v.value(x), &nodes, &widths, &m);
    Ok(VariationalResult { nodes, masses: m, energy, iterations })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LsiReport {
    pub xi: f64,
    /// `E(p) - E(sigma_0)`, with `sigma_0` normalized to unit mass.
    pub lhs: f64,
    /// `2/(8 xi - 2) int (2 pi H p - u_0')^2 p`.
    pub rhs: f64,
}

impl LsiReport {
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

const ENERGY_CELLS: usize = 1500;

/// Both sides of the free logarithmic Sobolev inequality for the density `p`
/// on the support of `sigma_0`.
pub fn free_lsi_check<P: Fn(f64) -> f64>(xi: f64, p: P) -> Result<LsiReport> {
    if !(xi > 0.25 && xi < 0.5) {
        return Err(Error::Domain { function: "free_lsi_check", value: xi, expected: "1/4 < xi < 1/2" });
    }
    let sigma = EquilibriumMeasure::sigma0(xi)?;
    let (a, b) = (sigma.a, sigma.b);
    let v = Potential::U0 { xi };
    let mass_p = sin2_rule(a, b, SUPPORT_NODES)?.integrate(&p);
    if (mass_p - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized { mass: mass_p });
    }
    let ep = energy_functional(&v, &DensityGrid::uniform(a, b, ENERGY_CELLS, &p).normalized())?;
    let es = energy_functional(
        &v,
        &DensityGrid::uniform(a, b, ENERGY_CELLS, |x| sigma.density(x)).normalized(),
    )?;
    let outer = sin2_rule(a, b, 200)?;
    let mut field = 0.0;
    for (&x, &w) in outer.nodes().iter().zip(outer.weights()) {
        let px = p(x);
        if px == 0.0 {
            continue;
        }
        let d = two_pi_hilbert(&p, x, a, b)? - v.derivative(x);
        field += w * d * d * px;
    }
    Ok(LsiReport { xi, lhs: ep - es, rhs: 2.0 / (8.0 * xi - 2.0) * field })
}

/// Solves the endpoint pair for `v(z) = -alpha log z + sqrt(s x)(z + 1/z)` with
/// unit mass and returns the closed-form density on it.
pub fn example_density_vsx(alpha: f64, s: f64, x: f64) -> Result<EquilibriumMeasure> {
    if !(alpha > 0.0 && s > 0.0 && x > 0.0) {
        return Err(Error::Domain { function: "example_density_vsx", value: alpha.min(s).min(x), expected: "alpha, s, x > 0" });
    }
    let v = Potential::VSX { alpha, s, x };
    let k = (s * x).sqrt();
    let z0 = (alpha + (alpha * alpha + 4.0 * k * k).sqrt()) / (2.0 * k);
    // unit mass: (1/2pi) int z v'/sqrt = 1
    let sol = solve_endpoints(|z| v.derivative(z), 2.0 * PI, (z0 / 4.0, z0 * 4.0))?;
    let mut m = EquilibriumMeasure { a: sol.a, b: sol.b, kind: DensityKind::VSX { alpha, s, x }, mass: 0.0 };
    m.mass = m.integrate(|_| 1.0)?;
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChebStatistic {
    pub a: f64,
    pub b: f64,
    /// `a_k`, `k = 0..K`.
    pub coefficients: Vec<f64>,
    /// `sum_{k>=1} k a_k^2 / 4` over the computed coefficients.
    pub variance: f64,
    /// Contribution of the upper half of the coefficients, a proxy for the truncation error.
    pub tail_bound: f64,
    /// Hilbert-Schmidt norm of `[a_{j+k}]` restricted to `j + k <= K`.
    pub hankel_hs_norm: f64,
}

/// Chebyshev expansion of `psi((a+b)/2 + (b-a)t/2) = sum a_k T_k(t)` and the
/// variance of the linear statistic.
pub fn linear_statistic<F: Fn(f64) -> f64>(psi: F, a: f64, b: f64, k_max: usize) -> Result<ChebStatistic> {
    if k_max == 0 || k_max > 128 {
        return Err(Error::InvalidParameter(format!("K = {k_max} outside 1..=128")));
    }
    if !(b > a) {
        return Err(Error::InvalidParameter(format!("empty interval [{a}, {b}]")));
    }
    let m = 4 * k_max + 64;
    let rule = chebyshev_first_kind(m, -1.0, 1.0)?;
    let (c, r) = ((a + b) / 2.0, (b - a) / 2.0);
    let samples: Vec<(f64, f64)> = rule.nodes().iter().zip(rule.weights()).map(|(&t, &w)| (t, w * psi(c + r * t))).collect();
    let coefficients: Vec<f64> = (0..=k_max)
        .map(|k| 2.0 / PI * samples.iter().map(|&(t, wf)| wf * chebyshev_t(k, t)).sum::<f64>())
        .collect();
    let term = |k: usize| k as f64 * coefficients[k].powi(2) / 4.0;
    let variance = (1..=k_max).map(term).sum();
    let tail_bound = (k_max.div_ceil(2).max(1)..=k_max).map(term).sum();
    let hankel_hs_norm = coefficients
        .iter()
        .enumerate()
        .map(|(m, a)| (m + 1) as f64 * a * a)
        .sum::<f64>()
        .sqrt();
    Ok(ChebStatistic { a, b, coefficients, variance, tail_bound, hankel_hs_norm })
}
