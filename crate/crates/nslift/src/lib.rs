//! Pseudo-spectral Galerkin solver for the incompressible Navier-Stokes
//! equations on the periodic 3-torus, built around a compatibility-lift
//! change of unknown.
//!
//! The library decomposes the velocity as u = v + beta, where beta is a
//! polynomial-in-time lift assembled from the initial-data jet so that the
//! shifted unknown v starts with identically vanishing time derivatives.
//! Alongside the two ODE formulations (direct and shifted) the crate ships
//! machinery that machine-checks the construction: jet recurrences and their
//! vanishing, an independent Taylor-series oracle, energy-inequality
//! monitors, and the continuation-window calculators.
//!
//! Modules:
//! - [`field`]: spectral fields on the torus and all spatial operators.
//! - [`compat`]: initial-data jets, the lift polynomial, residual forcing.
//! - [`galerkin`]: truncated ODE systems, time integration, pressure.
//! - [`estimates`]: diagnostics, energy balances, continuation windows.
//! - [`oracle`]: independent cross-validation engines.
//! - [`presets`]: canonical initial data and forcings.

pub mod compat;
pub mod error;
pub mod estimates;
pub mod field;
pub mod galerkin;
pub mod oracle;
pub mod presets;

pub use error::{Error, Result};
