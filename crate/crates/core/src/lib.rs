//! Pricing of European options hedged at discrete times.
//!
//! The option value one hedging period further from maturity is a signed
//! kernel integral of the current value. This crate solves that recursion
//! four ways and cross-checks them:
//!
//! * [`kernel`]: direct backward quadrature on a log-uniform price grid;
//! * [`mellin`]: the exact product solution in Mellin space, inverted along a
//!   vertical contour, plus the equivalent Green-function convolution;
//! * [`lognormal`]: closed forms for normally distributed log returns
//!   (Gaussian-mixture Green function, binomial-sum price, Black–Scholes);
//! * [`mc_oracle`]: Monte Carlo simulation of the one-step hedged portfolio.
//!
//! [`negativity`] locates asset-price regions where the hedging policy breaks
//! down (negative option values) and [`asymptotics`] studies the small-period
//! limit. Everything heavy is data-parallel behind the `parallel` feature.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cli;
pub mod config;
pub mod error;
pub mod kernel;
pub mod lognormal;
pub mod market_model;
pub mod mc_oracle;
pub mod mellin;
pub mod negativity;
pub mod numeric;
pub mod par;
pub mod report;

pub use error::{Error, Result};
