//! Data-driven polynomial chaos (aPC) and arbitrary multi-resolution
//! polynomial chaos (aMR-PC) surrogates for spatial output fields, with
//! Sobol' and total sensitivity indices computed directly from the expansion
//! coefficients.
//!
//! Pipeline: [`qmc`] designs mapped through [`distributions`] marginals,
//! [`multires`] dyadic decomposition and piecewise [`polybasis`] bases,
//! least-squares [`surrogate`] fits per output cell, coefficient-based
//! [`gsa`], and [`metrics`] against Monte-Carlo references. [`benchmarks`]
//! provides analytic models with known sensitivity structure.

// `!(x > 0.0)` rejects NaN along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod benchmarks;
pub mod config;
pub mod distributions;
pub mod error;
pub mod gsa;
pub mod io;
mod matrix;
pub mod metrics;
pub mod multires;
pub mod polybasis;
pub mod qmc;
mod summation;
pub mod surrogate;

pub use error::{Error, ErrorCategory, Result};
pub use matrix::Matrix;
