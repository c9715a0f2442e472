//! Fredholm determinants of Hankel and Howland operators, with identity checks.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod specfun;

pub use error::{Error, Result};
pub mod linalg;
pub mod operator;
pub mod linsys;
pub mod sinh_gordon;
pub mod hankel_products;
pub mod painleve;
pub mod coulomb;
pub mod verify;
