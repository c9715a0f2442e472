//! Special functions and quadrature rules shared by every other module.

mod airy;
mod bessel;
mod gamma;
mod laguerre;
mod quadrature;

pub use airy::airy;
pub use bessel::{bessel_k, bessel_k1, cosh_moment};
pub use gamma::{barnes_g_log, gamma, ln_gamma};
pub use laguerre::{laguerre, laguerre_derivative};
pub use quadrature::{
    chebyshev_first_kind, chebyshev_second_kind, composite_gauss_legendre, exponential_rule, gauss_legendre,
    halfline_rule, truncated_rule, DomainMap, QuadratureRule,
};

use serde::Serialize;

/// A special-function value together with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpecialValue {
    pub value: f64,
    pub abs_error_bound: f64,
}

impl SpecialValue {
    pub(crate) fn new(value: f64, abs_error_bound: f64) -> Self {
        debug_assert!(value.is_finite());
        Self {
            value,
            abs_error_bound: abs_error_bound.abs(),
        }
    }
}

/// Chebyshev polynomial of the first kind, `T_k(t)`, by the three-term recurrence.
pub fn chebyshev_t(k: usize, t: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => t,
        _ => {
            let (mut prev, mut cur) = (1.0, t);
            for _ in 1..k {
                let next = 2.0 * t * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}
