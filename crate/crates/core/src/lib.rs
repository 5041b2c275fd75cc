//! Bayesian inference of a quantity with a known sign from Gaussian
//! measurement results.
//!
//! A half-line (Heaviside) prior combined with a Gaussian likelihood gives a
//! truncated-Gaussian posterior. This crate evaluates that posterior, turns
//! it into point estimates under squared, absolute and zero-one loss, fuses
//! repeated measurements through their weighted mean, and ships quadrature
//! and Monte Carlo cross-checks plus coverage and curve generators.

pub mod cli;
pub mod error;
pub mod estimators;
pub mod fusion;
pub mod oracle;
pub mod posterior;
pub mod quadrature;
pub mod rng;
pub mod simulation;
pub mod specfun;

pub use error::{Error, Result};
pub use estimators::{
    estimate, minimize_expected_loss, summarize, CredibleSummary, LossKind, PointEstimate,
};
pub use fusion::{fuse_to_posterior, weighted_mean, Campaign, FusionResult};
pub use posterior::{
    make_posterior, Measurement, Side, SignConstraint, TruncatedGaussianPosterior,
};
