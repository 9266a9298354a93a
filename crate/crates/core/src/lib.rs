//! Numerical laboratory for sample-wise double descent in ridgeless linear
//! regression with isotropic Gaussian covariates.
//!
//! The crate is organized bottom-up:
//!
//! * [`randgen`] draws the data model deterministically from a seed.
//! * [`linalg`] wraps a thin SVD and derives pseudoinverse solves, rowspace
//!   projectors, Gram-inverse traces and the one-sample trace increment.
//! * [`estimator`] fits the min-norm interpolant directly and by gradient
//!   descent from zero.
//! * [`risk`] estimates bias, variance and excess risk by Monte Carlo and
//!   evaluates the closed-form predictions.
//! * [`harness`] runs sweeps and demonstrations and persists their results.
//!
//! Monte Carlo trials run on rayon when the `parallel` feature is enabled
//! (the default). Every trial draws from its own derived seed, so results do
//! not depend on the thread count.

pub mod error;
pub mod estimator;
pub mod exec;
pub mod harness;
pub mod linalg;
pub mod randgen;
pub mod risk;

pub use error::{Error, Result};
pub use estimator::{gd_fit, min_norm_fit, Estimate, GdConfig, Regime, StepSize};
pub use exec::{Executor, Parallelism};
pub use linalg::SvdFactors;
pub use randgen::{BetaMode, DataSet, ModelSpec, RngState};
pub use risk::{RiskSummary, TheoryPoint};

/// Dense real matrix used throughout the crate.
pub type Matrix = nalgebra::DMatrix<f64>;
/// Dense real column vector.
pub type Vector = nalgebra::DVector<f64>;
