//! Empirical inequality constants over random band-limited ensembles.

mod ensemble;
mod estimators;
mod profile;

pub use ensemble::{sample_band_limited, EnsembleSpec};
pub use estimators::{
    bernstein_ratio, check_derivative_identity, decay_rate, default_decay_times, default_fd_steps,
    estimate_bernstein_constant, estimate_bernstein_constant_with, estimate_decay_constant,
    estimate_decay_constant_with, estimate_poincare_constant, estimate_poincare_constant_with,
    maximal_domination_constant, maximal_ratio, poincare_ratio, ConstantEstimate, DerivativeCheck, Quantity,
    Refinement, Witness,
};
pub use profile::{fit_profile_points, fit_q_profile, ProfileFit, ProfileModel};
