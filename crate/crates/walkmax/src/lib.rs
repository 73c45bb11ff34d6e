//! Expectations of functions of a random walk and its running maximum,
//! via the Z-transform, Wiener-Hopf factorization and sinh-accelerated
//! contour quadrature.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contours;
pub mod engine;
pub mod error;
pub mod golden;
pub mod models;
pub mod oracle;
pub mod valuation;
pub mod wiener_hopf;
pub mod zinv;

pub use error::{Error, Result};
