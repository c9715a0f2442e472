use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// How a rule's nodes relate to the reference interval `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DomainMap {
    /// Affine map onto a bounded interval.
    Interval { a: f64, b: f64 },
    /// `y = scale (1 + u) / (1 - u)` onto `(0, inf)`.
    HalfLineRational { scale: f64 },
    /// Plain truncation of the half-line at `length`.
    Truncated { length: f64 },
    /// Gauss-Chebyshev nodes on `[a, b]`; the weights absorb `1/sqrt((b-x)(x-a))`.
    ChebyshevFirst { a: f64, b: f64 },
    /// Gauss-Chebyshev nodes on `[a, b]`; the weights absorb `sqrt((b-x)(x-a))`.
    ChebyshevSecond { a: f64, b: f64 },
    /// `y = e^v` with `v` on a composite Gauss-Legendre grid over `[v_min, v_max]`.
    Exponential { v_min: f64, v_max: f64 },
}

/// Nodes and positive weights of a quadrature rule, nodes strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    domain: DomainMap,
}

impl QuadratureRule {
    /// A rule on `[a, b]` from explicit nodes (strictly increasing) and positive weights.
    pub fn from_parts(nodes: Vec<f64>, weights: Vec<f64>, a: f64, b: f64) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::InvalidParameter("nodes and weights differ in length".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidParameter("nodes must increase and weights be positive".into()));
        }
        Ok(Self { nodes, weights, domain: DomainMap::Interval { a, b } })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn domain(&self) -> DomainMap {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn max_node(&self) -> f64 {
        *self.nodes.last().expect("rules are never empty")
    }

    pub fn min_node(&self) -> f64 {
        self.nodes[0]
    }

    /// `sum_i w_i f(y_i)`
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&y, &w)| w * f(y))
            .sum()
    }

    /// Same rule translated by `offset` (useful for tails `int_x^inf`).
    pub fn shifted(&self, offset: f64) -> QuadratureRule {
        QuadratureRule {
            nodes: self.nodes.iter().map(|y| y + offset).collect(),
            weights: self.weights.clone(),
            domain: self.domain,
        }
    }

    pub fn sqrt_weights(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w.sqrt()).collect()
    }
}

const NEWTON_MAX_ITER: usize = 100;

/// Gauss-Legendre rule with `n` nodes on `[a, b]`.
///
/// Nodes come from Newton iteration on the Legendre three-term recurrence,
/// seeded with the Tricomi-style guess `cos(pi (i - 1/4) / (n + 1/2))`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::InvalidParameter("gauss_legendre needs n >= 1".into()));
    }
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidParameter(format!(
            "gauss_legendre needs a finite interval a < b, got [{a}, {b}]"
        )));
    }
    let (u, w) = reference_legendre(n)?;
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    Ok(QuadratureRule {
        nodes: u.iter().map(|u| mid + half * u).collect(),
        weights: w.iter().map(|w| half * w).collect(),
        domain: DomainMap::Interval { a, b },
    })
}

/// Reference nodes (increasing) and weights on `[-1, 1]`.
fn reference_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut converged = false;
        let mut last_change = f64::INFINITY;
        let mut dp = 0.0;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            last_change = dz.abs();
            if last_change <= 1e-15 * z.abs().max(1e-3) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergent {
                what: "Gauss-Legendre node search",
                iterations: NEWTON_MAX_ITER,
                last_change,
            });
        }
        // final derivative at the converged node
        let (_, d) = legendre_with_derivative(n, z);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        // z is the i-th largest root
        nodes[n - 1 - i] = z;
        nodes[i] = -z;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok((nodes, weights))
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// Gauss-Legendre mapped to `(0, inf)` by `y = scale (1 + u) / (1 - u)`.
pub fn halfline_rule(n: usize, scale: f64) -> Result<QuadratureRule> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "halfline_rule needs scale > 0, got {scale}"
        )));
    }
    let base = gauss_legendre(n, -1.0, 1.0)?;
    let (nodes, weights) = base
        .nodes
        .iter()
        .zip(&base.weights)
        .map(|(&u, &w)| {
            let d = 1.0 - u;
            (scale * (1.0 + u) / d, w * 2.0 * scale / (d * d))
        })
        .unzip();
    Ok(QuadratureRule {
        nodes,
        weights,
        domain: DomainMap::HalfLineRational { scale },
    })
}

/// Gauss-Legendre on `[0, length]`, the truncation alternative to [`halfline_rule`].
pub fn truncated_rule(n: usize, length: f64) -> Result<QuadratureRule> {
    let mut rule = gauss_legendre(n, 0.0, length)?;
    rule.domain = DomainMap::Truncated { length };
    Ok(rule)
}

/// `panels` equal sub-intervals of `[a, b]`, each with a `points`-node Gauss-Legendre rule.
pub fn composite_gauss_legendre(
    panels: usize,
    points: usize,
    a: f64,
    b: f64,
) -> Result<QuadratureRule> {
    if panels == 0 {
        return Err(Error::InvalidParameter("need at least one panel".into()));
    }
    let (u, w) = reference_legendre(points)?;
    let h = (b - a) / panels as f64;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("bad interval [{a}, {b}]")));
    }
    let mut nodes = Vec::with_capacity(panels * points);
    let mut weights = Vec::with_capacity(panels * points);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (u, w) in u.iter().zip(&w) {
            nodes.push(mid + 0.5 * h * u);
            weights.push(0.5 * h * w);
        }
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        domain: DomainMap::Interval { a, b },
    })
}

/// Composite Gauss-Legendre in `v = log y` over `[v_min, v_max]`, returned as a
/// rule in `y` (weights carry the Jacobian `e^v`).
pub fn exponential_rule(
    panels: usize,
    points: usize,
    v_min: f64,
    v_max: f64,
) -> Result<QuadratureRule> {
    let base = composite_gauss_legendre(panels, points, v_min, v_max)?;
    let nodes: Vec<f64> = base.nodes.iter().map(|v| v.exp()).collect();
    let weights = base.weights.iter().zip(&nodes).map(|(w, y)| w * y).collect();
    Ok(QuadratureRule {
        nodes,
        weights,
        domain: DomainMap::Exponential { v_min, v_max },
    })
}

/// Gauss-Chebyshev rule of the first kind: `sum w_k f(x_k) ~ int_a^b f(x) / sqrt((b-x)(x-a)) dx`.
pub fn chebyshev_first_kind(m: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    check_interval(m, a, b)?;
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    let mf = m as f64;
    let nodes = (0..m)
        .map(|k| c - r * ((k as f64 + 0.5) * PI / mf).cos())
        .collect();
    Ok(QuadratureRule {
        nodes,
        weights: vec![PI / mf; m],
        domain: DomainMap::ChebyshevFirst { a, b },
    })
}

/// Gauss-Chebyshev rule of the second kind: `sum w_k f(x_k) ~ int_a^b f(x) sqrt((b-x)(x-a)) dx`.
pub fn chebyshev_second_kind(m: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    check_interval(m, a, b)?;
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    let step = PI / (m as f64 + 1.0);
    let (nodes, weights) = (1..=m)
        .map(|k| {
            let th = k as f64 * step;
            (c - r * th.cos(), step * r * r * th.sin().powi(2))
        })
        .unzip();
    Ok(QuadratureRule {
        nodes,
        weights,
        domain: DomainMap::ChebyshevSecond { a, b },
    })
}

fn check_interval(m: usize, a: f64, b: f64) -> Result<()> {
    if m == 0 || !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Chebyshev rule needs m >= 1 and a < b, got m={m}, [{a}, {b}]"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn one_point_rule_is_midpoint() {
        let r = gauss_legendre(1, -1.0, 1.0).unwrap();
        assert_abs_diff_eq!(r.nodes()[0], 0.0);
        assert_abs_diff_eq!(r.weights()[0], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn two_point_rule() {
        let r = gauss_legendre(2, -1.0, 1.0).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert_abs_diff_eq!(r.nodes()[0], -s, epsilon = 1e-15);
        assert_abs_diff_eq!(r.nodes()[1], s, epsilon = 1e-15);
        assert_abs_diff_eq!(r.weights()[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.weights()[1], 1.0, epsilon = 1e-15);
        let r01 = gauss_legendre(2, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(r01.integrate(|x| x.powi(3)), 0.25, epsilon = 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(gauss_legendre(0, 0.0, 1.0).is_err());
        assert!(gauss_legendre(3, 1.0, 1.0).is_err());
        assert!(gauss_legendre(3, 0.0, f64::INFINITY).is_err());
        assert!(halfline_rule(10, 0.0).is_err());
    }

    #[test]
    fn bounded_rule_reproduces_length() {
        for &n in &[1, 7, 64, 500] {
            let r = gauss_legendre(n, -0.3, 2.9).unwrap();
            assert!((r.integrate(|_| 1.0) - 3.2).abs() / 3.2 <= 1e-12);
            assert!(r.weights().iter().all(|&w| w > 0.0));
            assert!(r.nodes().windows(2).all(|p| p[0] < p[1]));
            assert!(r.nodes().iter().all(|&y| -0.3 < y && y < 2.9));
        }
    }

    #[test]
    fn halfline_gamma_moments() {
        let r = halfline_rule(200, 1.0).unwrap();
        assert_abs_diff_eq!(r.integrate(|y| (-y).exp()), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(r.integrate(|y| y * (-y).exp()), 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(r.integrate(|y| y.powi(3) * (-y).exp()), 6.0, epsilon = 1e-7);
        let mut fact = 1.0;
        for k in 0..=6 {
            if k > 0 {
                fact *= k as f64;
            }
            let got = r.integrate(|y| y.powi(k) * (-y).exp());
            assert!((got - fact).abs() / fact <= 1e-8, "k={k}: {got}");
        }
        assert!(r.nodes().windows(2).all(|p| p[0] < p[1]));
        assert!(r.min_node() > 0.0);
    }

    #[test]
    fn doubling_n_improves_tenfold_until_floor() {
        let exact = 2.0;
        let mut prev = f64::INFINITY;
        for n in [8, 16, 32, 64] {
            let err = (halfline_rule(n, 1.0)
                .unwrap()
                .integrate(|y| y * y * (-y).exp())
                - exact)
                .abs();
            if prev > 1e-12 {
                assert!(err <= prev / 10.0 || err < 1e-12, "n={n}: {err} vs {prev}");
            }
            prev = err;
        }
        let mut prev = f64::INFINITY;
        for n in [8, 16, 32, 64] {
            let err = (truncated_rule(n, 40.0)
                .unwrap()
                .integrate(|y| y * y * (-y).exp())
                - exact)
                .abs();
            if prev > 1e-12 {
                assert!(err <= prev / 10.0 || err < 1e-12, "n={n}: {err} vs {prev}");
            }
            prev = err;
        }
    }

    #[test]
    fn chebyshev_rules_absorb_the_weights() {
        let (a, b) = (0.2, 1.7);
        let r1 = chebyshev_first_kind(40, a, b).unwrap();
        assert_abs_diff_eq!(r1.integrate(|_| 1.0), PI, epsilon = 1e-13);
        // int dx / (x sqrt(..)) = pi / sqrt(ab)
        assert_abs_diff_eq!(
            r1.integrate(|x| 1.0 / x),
            PI / (a * b).sqrt(),
            epsilon = 1e-12
        );
        let r2 = chebyshev_second_kind(40, a, b).unwrap();
        // semicircle area: pi r^2 / 2
        let rad = 0.5 * (b - a);
        assert_abs_diff_eq!(r2.integrate(|_| 1.0), PI * rad * rad / 2.0, epsilon = 1e-13);
        assert!(r2.nodes().windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn composite_rule_integrates_smooth_functions() {
        let r = composite_gauss_legendre(10, 12, 0.0, 5.0).unwrap();
        assert_abs_diff_eq!(r.integrate(f64::sin), 1.0 - 5f64.cos(), epsilon = 1e-14);
    }

    proptest::proptest! {
        #[test]
        fn polynomial_exactness(n in 1usize..40, a in -3.0f64..0.0, len in 0.1f64..4.0, deg_frac in 0.0f64..1.0) {
            let b = a + len;
            let r = gauss_legendre(n, a, b).unwrap();
            let deg = ((2 * n - 1) as f64 * deg_frac).floor() as i32;
            let exact = (b.powi(deg + 1) - a.powi(deg + 1)) / (deg + 1) as f64;
            let got = r.integrate(|x| x.powi(deg));
            let scale = r.integrate(|x| x.abs().powi(deg));
            proptest::prop_assert!((got - exact).abs() <= 1e-13 * n as f64 * scale + 1e-15);
        }
    }
}
