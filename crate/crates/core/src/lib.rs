//! Laguerre-transform solvers for the one-way wave equation.
//!
//! The time dependence of every field is expanded in orthonormal Laguerre
//! functions, which turns time derivatives into triangular recurrences over
//! the term index. What remains per term is a marching problem in space:
//! along `x` for the 1D advection model, along depth `z` for the 2D
//! Padé-approximated one-way equation.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic1d;
pub mod error;
pub mod gridio;
pub mod laguerre;
pub mod numkernels;
pub mod schemes1d;
pub mod solver2d;
pub mod splines;
pub mod stability;
pub mod wavelet;

pub use error::{Error, Result};
pub use laguerre::{LaguerreParams, LaguerreSeries, PhiAccumulator};
pub use numkernels::{BandedLu, BandedMatrix};
pub use wavelet::SourceWavelet;
