use crate::error::{Error, Result};

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// `zeta'(-1)`, the constant term of the Barnes G asymptotic expansion.
const ZETA_PRIME_MINUS_ONE: f64 = -0.165_421_143_700_450_93;
/// Argument above which the asymptotic series is used directly.
const ASYMPTOTIC_FROM: f64 = 12.0;
/// `B_{2k+2}` for k = 1..=7.
const BERNOULLI: [f64; 7] = [
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// `ln G(z)` for the Barnes G-function, `G(1) = 1`, `G(z + 1) = Gamma(z) G(z)`.
///
/// Integer arguments use the exact product `G(n) = prod_{j=1}^{n-2} j^{n-1-j}`.
/// Other arguments are shifted up by the recursion into the range of the
/// Stirling-type asymptotic expansion.
pub fn barnes_g_log(z: f64) -> Result<f64> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Domain {
            function: "barnes_g_log",
            value: z,
            expected: "z > 0",
        });
    }
    if z.fract() == 0.0 && z < 1e6 {
        return Ok(barnes_g_log_integer(z as u64));
    }
    Ok(barnes_g_log_real(z))
}

fn barnes_g_log_integer(n: u64) -> f64 {
    (1..n.saturating_sub(1))
        .map(|j| (n - 1 - j) as f64 * (j as f64).ln())
        .sum()
}

fn barnes_g_log_real(z: f64) -> f64 {
    let mut shift = 0.0;
    let mut w = z;
    while w < ASYMPTOTIC_FROM {
        shift += ln_gamma(w);
        w += 1.0;
    }
    log_g_asymptotic(w - 1.0) - shift
}

/// Asymptotic series for `ln G(1 + w)`.
fn log_g_asymptotic(w: f64) -> f64 {
    let lw = w.ln();
    let mut s = 0.5 * w * w * lw - 0.75 * w * w + 0.5 * w * (2.0 * std::f64::consts::PI).ln()
        - lw / 12.0
        + ZETA_PRIME_MINUS_ONE;
    let w2 = w * w;
    let mut pow = w2;
    for (k, b) in (1..).zip(BERNOULLI) {
        let kf = k as f64;
        s += b / (4.0 * kf * (kf + 1.0) * pow);
        pow *= w2;
    }
    s
}
