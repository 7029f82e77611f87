//! Strictly isospectral one-parameter families of 1D potentials.
//!
//! * [`susy`]: superpotentials, factorization operators, the general
//!   Riccati solution and the isospectral family on sampled functions.
//! * [`delta`]: closed forms of the family built on the attractive
//!   `g δ(x)` potential, with parameter classification and pole location.
//! * [`spectral`]: bound-state and scattering solvers used to check that
//!   every family member shares the spectrum of the original potential.

pub mod delta;
pub mod error;
pub mod grid;
pub mod spectral;
pub mod susy;
pub mod tridiag;

pub use error::{Error, Result};
pub use grid::{Break, Grid, GridFunction};
pub use spectral::{ScatteringResult, SingularPotential, SpectralReport};
pub use susy::{FactorizationFrame, FamilyOptions, IsoParameter, ParameterClass, SupportLine};
