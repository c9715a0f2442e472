/// Generalized Laguerre polynomial `L_n^{(alpha)}(x)` in the standard normalization,
/// `L_n^{(alpha)}(0) = binom(n + alpha, n)`, by the three-term recurrence.
pub fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `d^k/dx^k L_n^{(alpha)}(x) = (-1)^k L_{n-k}^{(alpha+k)}(x)`.
pub fn laguerre_derivative(n: usize, alpha: f64, x: f64, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    sign * laguerre(n - k, alpha + k as f64, x)
}
