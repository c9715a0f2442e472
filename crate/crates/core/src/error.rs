use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{function}: argument {value} outside the domain ({expected})")]
    Domain {
        function: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("{what} did not converge after {iterations} iterations (last change {last_change:e})")]
    NonConvergent {
        what: &'static str,
        iterations: usize,
        last_change: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Hilbert-Schmidt estimate diverges: {0}")]
    DivergentHilbertSchmidt(String),

    #[error("matrix is near singular (condition estimate {condition:e})")]
    NearSingular { condition: f64 },

    #[error("operator norm {norm} is not below {threshold}; move x beyond the invertibility threshold")]
    NormTooLarge { norm: f64, threshold: f64 },

    #[error("grid rejected: {0}")]
    Grid(String),

    #[error("zeta = {zeta} is resonant with a spectral node (distance {distance:e})")]
    Resonant { zeta: f64, distance: f64 },

    #[error("density is not normalized: mass {mass}")]
    NotNormalized { mass: f64 },

    #[error("{0}")]
    Unsupported(String),

    #[error("root finding failed: {0}")]
    RootFind(String),

    #[error("tail does not decay: {0}")]
    NonDecayingTail(String),
}

pub type Result<T> = std::result::Result<T, Error>;
