//! Fair strikes of volatility swaps under a stochastic-volatility model with
//! stochastic jump intensity and simultaneous price/variance jumps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod mgf;
pub mod model;
pub mod montecarlo;
pub mod numerics;
pub mod ode;
pub mod pricing;
pub mod quadrature;

pub mod cli;

pub use error::{Error, Result};
pub use model::{Model, ModelParams, SwapContract};
pub use pricing::{Pricer, QuadratureConfig, StrikeResult};
