//! Simulation and Monte Carlo verification toolkit for hyperbolic Bessel
//! processes `dR = dB + (α + ½) coth(R) dt`.
//!
//! The crate evaluates `E exp(−λ cosh R_t)` through several independent
//! probabilistic representations, computes the explicit densities of
//! `cosh R_t` and `R_t`, and checks distributional identities between
//! hyperbolic Bessel processes, exponential functionals of Brownian motion
//! and squared Bessel processes by two-sample tests.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod cli;
pub mod densities;
pub mod error;
pub mod identities;
pub mod laplace;
pub mod paths;
pub mod rng;
pub mod sde;
pub mod specfun;
pub mod stats;

pub use error::{Error, Result};
pub use laplace::{LtMethod, LtQuery, McConfig};
pub use paths::{ExpFactor, ExpFunctionals, PathBatch, TimeGrid, DEFAULT_STEPS_PER_UNIT};
pub use rng::{Exec, Seed};
pub use sde::{BesqSpec, ProcessSpec};
pub use stats::{MCEstimate, STDERR_GATE};
