//! Pseudo-spectral laboratory for the damped barotropic Euler equations with
//! Riesz interactions on the periodic torus.
//!
//! * [`spectral`]: transforms, Fourier multipliers, norms and dealiasing.
//! * [`model`]: parameters, state representations and right-hand sides.
//! * [`timestep`]: RK4 integrators with exact damping and step control.
//! * [`diagnostics`]: energy functionals, constants and decay fits.

pub mod diagnostics;
pub mod error;
pub mod model;
pub mod spectral;
pub mod timestep;

pub use error::{Error, Result};
