//! Numerical toolkit for frequency-localized Bernstein inequalities of the
//! fractional Laplacian: α-stable heat kernels, Littlewood–Paley
//! multipliers on periodic grids, perturbed-kernel positivity, periodic
//! heat kernels, and ensemble estimators for the associated constants.

pub mod error;
pub mod inequality;
pub mod kernel;
pub mod params;
pub mod periodic;
pub mod positivity;
pub mod quad;
pub(crate) mod radial;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use params::FractionalParams;
