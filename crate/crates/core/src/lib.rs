//! Spectral time stepping for gradient flows with global constraints.
//!
//! Fields live on a periodic box `[-pi, pi)^d` and are discretized with
//! Fourier collocation. Each scheme reduces a step to a few constant-coefficient
//! solves plus scalar equations for the Lagrange multipliers.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod ic;
pub mod io;
pub mod models;
pub mod multiplier;
pub mod run;
pub mod spectral;
pub mod steppers;

pub use error::{Error, Result};
