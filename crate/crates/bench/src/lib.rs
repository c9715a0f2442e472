//! Fixtures shared by the criterion benches in `benches/`.

use taukernel_core::operator::TabulatedWeight;
use taukernel_core::sinh_gordon::HowlandFamily;
use taukernel_core::specfun::halfline_rule;

/// `h(y) = e^{-y}` tabulated on the `n`-point half-line rule.
pub fn exponential_weight(n: usize) -> TabulatedWeight {
    TabulatedWeight::from_fn(halfline_rule(n, 1.0).expect("valid rule"), |y| (-y).exp())
}

pub fn exponential_family(n: usize) -> HowlandFamily {
    HowlandFamily::new(exponential_weight(n))
}
