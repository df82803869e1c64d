//! Numerical toolkit for the chordal Loewner equation driven by complex-valued functions.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod backward;
pub mod cli;
pub mod cone;
pub mod driver;
pub mod error;
pub mod exec;
pub mod forward;
pub mod io;
pub mod motion;
mod ode;
pub mod raster;

pub use error::{Error, Result};
