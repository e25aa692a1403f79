//! Pseudospectral laboratory for the quasilinear dispersive wave equation
//!
//! ```text
//! psi_tt - (a1 + 3 a2 psi_x^2) psi_xx + a3 psi^sigma = 0
//! ```
//!
//! on a periodic domain, with RK4 time stepping, conservation and resolution
//! diagnostics, a perturbation harness, and a small CLI.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod error;
pub mod grid;
pub mod integrator;
pub mod model;
pub mod output;
pub mod plot;

pub use error::{Error, Result};
