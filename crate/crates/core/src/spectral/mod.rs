//! Periodic-grid spectral calculus: transforms, Littlewood–Paley
//! projections, radial multipliers, norms and the maximal function.

mod bump;
mod grid;
mod maximal;
mod multiplier;

pub use bump::{make_bump, smooth_step, BumpKind, BumpProfile, Transition};
pub use grid::GridFunction;
pub use maximal::{ball_average, maximal_function, maximal_radii};
pub use multiplier::{
    apply_multiplier, bernstein_pairing, lebesgue_norm, lp_project, signed_power, weighted_pairing,
    FrequencyAnnulus, Projection, SpectralMultiplier,
};
pub use rustfft::num_complex::Complex64;
